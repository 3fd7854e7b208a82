#include "skelimg/io.hpp"

#include "skelimg/errors.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace skelimg {

using nlohmann::json;

namespace {

[[noreturn]] void bad(std::string_view where, std::string_view what)
{
   throw ValidationError(fmt::format("{}: {}", where, what));
}

double number(const json& j, std::string_view where)
{
   if(!j.is_number()) bad(where, "expected a number");
   const double v = j.get<double>();
   if(!std::isfinite(v)) bad(where, "non-finite value");
   return v;
}

int integer(const json& j, std::string_view where)
{
   if(!j.is_number_integer()) bad(where, "expected an integer");
   return j.get<int>();
}

const json& array_of(const json& j, std::string_view where, size_t size = 0)
{
   if(!j.is_array()) bad(where, "expected an array");
   if(size > 0 && j.size() != size) bad(where, fmt::format("expected {} entries", size));
   return j;
}

const json& field(const json& j, const char* key, std::string_view where)
{
   if(!j.is_object()) bad(where, "expected an object");
   const auto it = j.find(key);
   if(it == j.end()) bad(where, fmt::format("missing key \"{}\"", key));
   return *it;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    std::string_view where)
{
   for(const auto& [k, v] : j.items())
      if(std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; })
         == keys.end())
         bad(where, fmt::format("unknown key \"{}\"", k));
}

} // namespace

// ------------------------------------------------------------------- topology
//
ojson topology_to_json(const SkeletonTopology& t)
{
   ojson j;
   j["joints"] = t.joints;
   ojson edges = ojson::array();
   for(const auto& e : t.edges) edges.push_back({e.a, e.b});
   j["edges"] = edges;
   ojson parents = ojson::array();
   for(const auto& p : t.parents) parents.push_back(p ? ojson(*p) : ojson(nullptr));
   j["parents"] = parents;
   j["flip_map"] = t.flip_map;
   ojson layouts = ojson::object();
   for(const auto& [id, lay] : t.channel_layouts) layouts[id] = lay;
   j["channel_layouts"] = layouts;
   return j;
}

SkeletonTopology topology_from_json(const json& j)
{
   const std::string_view w = "topology";
   if(!j.is_object()) bad(w, "expected an object");
   reject_unknown(j, {"joints", "edges", "parents", "flip_map", "channel_layouts"}, w);
   SkeletonTopology t;
   for(const auto& s : array_of(field(j, "joints", w), "joints")) {
      if(!s.is_string()) bad("joints", "expected strings");
      t.joints.push_back(s.get<std::string>());
   }
   const auto& edges = array_of(field(j, "edges", w), "edges");
   for(size_t i = 0; i < edges.size(); ++i) {
      const auto where = fmt::format("edges[{}]", i);
      const auto& e = array_of(edges[i], where, 2);
      t.edges.push_back({integer(e[0], where), integer(e[1], where)});
   }
   const auto& parents = array_of(field(j, "parents", w), "parents");
   for(size_t i = 0; i < parents.size(); ++i) {
      if(parents[i].is_null())
         t.parents.push_back(std::nullopt);
      else
         t.parents.push_back(integer(parents[i], fmt::format("parents[{}]", i)));
   }
   const auto& flip = array_of(field(j, "flip_map", w), "flip_map");
   for(size_t i = 0; i < flip.size(); ++i)
      t.flip_map.push_back(integer(flip[i], fmt::format("flip_map[{}]", i)));
   const auto& layouts = field(j, "channel_layouts", w);
   if(!layouts.is_object()) bad("channel_layouts", "expected an object");
   for(const auto& [id, lay] : layouts.items()) {
      const auto where = fmt::format("channel_layouts.{}", id);
      std::vector<int> chans;
      for(const auto& c : array_of(lay, where)) chans.push_back(integer(c, where));
      t.channel_layouts[id] = std::move(chans);
   }
   return t;
}

SkeletonTopology read_topology_file(const std::filesystem::path& path)
{
   const auto text = read_file(path);
   json j;
   try {
      j = json::parse(text);
   } catch(const json::parse_error& e) {
      throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
   }
   auto t = topology_from_json(j);
   require_valid(t);
   return t;
}

void write_topology_file(const std::filesystem::path& path, const SkeletonTopology& topo)
{
   write_file(path, topology_to_json(topo).dump(2) + "\n");
}

// ---------------------------------------------------------------- pose records
//
std::optional<Pose3D> PoseRecord::pose3d() const
{
   if(!pos3d) return std::nullopt;
   Pose3D p;
   p.positions = *pos3d;
   p.orientations = rot6d ? *rot6d : std::vector<Rotation6D>(pos3d->size());
   return p;
}

void PoseRecord::set_pose3d(const Pose3D& p)
{
   pos3d = p.positions;
   rot6d = p.orientations;
}

ojson pose_record_to_json(const PoseRecord& r)
{
   ojson j;
   j["frame"] = r.frame;
   j["activity"] = r.activity ? ojson(*r.activity) : ojson(nullptr);
   ojson kp = ojson::array();
   for(const auto& k : r.kp2d.keypoints) kp.push_back({k.x(), k.y()});
   j["kp2d"] = kp;
   if(r.pos3d) {
      ojson pos = ojson::array();
      for(const auto& p : *r.pos3d) pos.push_back({p.x(), p.y(), p.z()});
      j["pos3d"] = pos;
   } else {
      j["pos3d"] = nullptr;
   }
   if(r.rot6d) {
      ojson rot = ojson::array();
      for(const auto& q : *r.rot6d) rot.push_back(q.values());
      j["rot6d"] = rot;
   } else {
      j["rot6d"] = nullptr;
   }
   return j;
}

PoseRecord pose_record_from_json(const json& j)
{
   const std::string_view w = "pose record";
   if(!j.is_object()) bad(w, "expected an object");
   reject_unknown(j, {"frame", "activity", "kp2d", "pos3d", "rot6d"}, w);
   PoseRecord r;
   const auto& frame = field(j, "frame", w);
   if(!frame.is_number_integer()) bad("frame", "expected an integer");
   r.frame = frame.get<int64_t>();
   if(const auto it = j.find("activity"); it != j.end() && !it->is_null()) {
      if(!it->is_string()) bad("activity", "expected a string or null");
      r.activity = it->get<std::string>();
   }
   const auto& kp = array_of(field(j, "kp2d", w), "kp2d");
   for(size_t i = 0; i < kp.size(); ++i) {
      const auto where = fmt::format("kp2d[{}]", i);
      const auto& p = array_of(kp[i], where, 2);
      r.kp2d.keypoints.emplace_back(number(p[0], where), number(p[1], where));
   }
   if(const auto it = j.find("pos3d"); it != j.end() && !it->is_null()) {
      const auto& pos = array_of(*it, "pos3d");
      r.pos3d.emplace();
      for(size_t i = 0; i < pos.size(); ++i) {
         const auto where = fmt::format("pos3d[{}]", i);
         const auto& p = array_of(pos[i], where, 3);
         r.pos3d->emplace_back(number(p[0], where), number(p[1], where), number(p[2], where));
      }
   }
   if(const auto it = j.find("rot6d"); it != j.end() && !it->is_null()) {
      const auto& rot = array_of(*it, "rot6d");
      r.rot6d.emplace();
      for(size_t i = 0; i < rot.size(); ++i) {
         const auto where = fmt::format("rot6d[{}]", i);
         const auto& q = array_of(rot[i], where, 6);
         std::array<double, 6> v{};
         for(size_t c = 0; c < 6; ++c) v[c] = number(q[c], where);
         try {
            r.rot6d->emplace_back(v);
         } catch(const ValidationError& e) {
            bad(where, e.what());
         }
      }
      if(!r.pos3d) bad("rot6d", "present without pos3d");
      if(r.rot6d->size() != r.pos3d->size())
         bad("rot6d", fmt::format("{} orientations for {} positions", r.rot6d->size(),
                                  r.pos3d->size()));
   }
   return r;
}

std::string dump_pose_records(std::span<const PoseRecord> recs)
{
   std::string out;
   for(const auto& r : recs) {
      out += pose_record_to_json(r).dump();
      out += '\n';
   }
   return out;
}

std::vector<PoseRecord> parse_pose_records(std::string_view text, std::string_view source)
{
   std::vector<PoseRecord> out;
   size_t line_no = 0;
   size_t pos = 0;
   while(pos < text.size()) {
      const size_t end = std::min(text.find('\n', pos), text.size());
      const auto line = text.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if(line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
         out.push_back(pose_record_from_json(json::parse(line)));
      } catch(const json::parse_error& e) {
         throw ValidationError(fmt::format("{}:{}: {}", source, line_no, e.what()));
      } catch(const ValidationError& e) {
         throw ValidationError(fmt::format("{}:{}: {}", source, line_no, e.what()));
      }
   }
   return out;
}

ojson fit_result_to_json(const FitResult& result)
{
   ojson pose;
   if(const auto* p2 = std::get_if<Pose2D>(&result.pose)) {
      ojson kp = ojson::array();
      for(const auto& k : p2->keypoints) kp.push_back({k.x(), k.y()});
      pose["kp2d"] = kp;
   } else {
      const auto& p3 = std::get<Pose3D>(result.pose);
      ojson pos = ojson::array();
      for(const auto& p : p3.positions) pos.push_back({p.x(), p.y(), p.z()});
      ojson rot = ojson::array();
      for(const auto& q : p3.orientations) rot.push_back(q.values());
      pose["pos3d"] = pos;
      pose["rot6d"] = rot;
   }
   ojson j;
   j["mode"] = str(result.mode);
   j["steps"] = result.steps;
   j["termination"] = str(result.termination);
   j["final_loss"] = result.final_loss();
   j["loss_curve"] = result.loss_curve;
   j["pose"] = pose;
   return j;
}

std::string loss_curve_csv(const FitResult& result)
{
   std::string out = "step,loss\n";
   for(size_t n = 0; n < result.loss_curve.size(); ++n)
      out += fmt::format("{},{:.17g}\n", n, result.loss_curve[n]);
   return out;
}

std::vector<PoseRecord> read_pose_file(const std::filesystem::path& path)
{
   return parse_pose_records(read_file(path), path.string());
}

void write_pose_file(const std::filesystem::path& path, std::span<const PoseRecord> recs)
{
   write_file(path, dump_pose_records(recs));
}

// ----------------------------------------------------------------------- SKIM
//
namespace {

void put_u32(std::string& out, uint32_t v)
{
   for(int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xffu));
}

uint32_t get_u32(std::string_view b, size_t at)
{
   uint32_t v = 0;
   for(int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(b[at + size_t(i)])) << (8 * i);
   return v;
}

constexpr size_t k_skim_header = 4 + 1 + 3 * 4;

} // namespace

std::string encode_skim(const SkeletonImage& img)
{
   std::string out = "SKIM";
   out.push_back(char(k_skim_version));
   put_u32(out, uint32_t(img.channels()));
   put_u32(out, uint32_t(img.width()));
   put_u32(out, uint32_t(img.height()));
   out.reserve(out.size() + 4 * img.size());
   for(double v : img.values()) put_u32(out, std::bit_cast<uint32_t>(float(v)));
   return out;
}

SkeletonImage decode_skim(std::string_view b)
{
   if(b.size() < k_skim_header || b.substr(0, 4) != "SKIM")
      throw ValidationError("not a SKIM file (bad magic)");
   if(uint8_t(b[4]) != k_skim_version)
      throw ValidationError(fmt::format("unsupported SKIM version {}", int(uint8_t(b[4]))));
   const uint32_t c = get_u32(b, 5);
   const uint32_t w = get_u32(b, 9);
   const uint32_t h = get_u32(b, 13);
   if(w < 1 || h < 1 || w > (1u << 16) || h > (1u << 16) || c > 1024)
      throw ValidationError(fmt::format("SKIM: implausible shape {}x{}x{}", c, w, h));
   const uint64_t n = uint64_t(c) * w * h;
   if(b.size() != k_skim_header + 4 * n)
      throw ValidationError(fmt::format("SKIM: expected {} bytes, got {}",
                                        k_skim_header + 4 * n, b.size()));
   SkeletonImage img{int(c), int(w), int(h)};
   auto vals = img.values();
   for(uint64_t i = 0; i < n; ++i)
      vals[i] = double(std::bit_cast<float>(get_u32(b, k_skim_header + 4 * i)));
   return img;
}

void write_skim(const std::filesystem::path& path, const SkeletonImage& img)
{
   write_file(path, encode_skim(img));
}

SkeletonImage read_skim(const std::filesystem::path& path)
{
   try {
      return decode_skim(read_file(path));
   } catch(const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
   }
}

SkeletonImage quantize_f32(const SkeletonImage& img)
{
   SkeletonImage out = img;
   for(double& v : out.values()) v = double(float(v));
   return out;
}

// ---------------------------------------------------------------------- files
//
std::string read_file(const std::filesystem::path& path)
{
   std::ifstream in(path, std::ios::binary);
   if(!in) throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
   std::ostringstream ss;
   ss << in.rdbuf();
   if(in.bad()) throw IoError(fmt::format("error reading '{}'", path.string()));
   return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes)
{
   std::ofstream out(path, std::ios::binary | std::ios::trunc);
   if(!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
   out.write(bytes.data(), std::streamsize(bytes.size()));
   if(!out) throw IoError(fmt::format("error writing '{}'", path.string()));
}

} // namespace skelimg
