#include "oracles.hpp"

#include "skelimg/config.hpp"
#include "skelimg/errors.hpp"
#include "skelimg/io.hpp"
#include "skelimg/png_export.hpp"

#include <doctest.h>
#include <png.h>

#include <cstdio>
#include <algorithm>
#include <filesystem>

using namespace skelimg;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
   const auto dir = fs::temp_directory_path() / ("skelimg_test_io_" + name);
   fs::remove_all(dir);
   fs::create_directories(dir);
   return dir;
}

std::string expect_validation(const auto& fn)
{
   try {
      fn();
   } catch(const ValidationError& e) {
      return e.what();
   }
   FAIL("expected a ValidationError");
   return {};
}

} // namespace

TEST_CASE("topology JSON round trip")
{
   const auto& t = default_human_topology();
   const auto j = topology_to_json(t);
   CHECK(topology_from_json(j) == t);
   const auto dir = scratch_dir("topo");
   write_topology_file(dir / "t.json", t);
   CHECK(read_topology_file(dir / "t.json") == t);

   auto bad = nlohmann::json::parse(j.dump());
   bad["extra"] = 1;
   CHECK_THROWS_AS(topology_from_json(bad), ValidationError);
   bad = nlohmann::json::parse(j.dump());
   bad["edges"][0] = {0, 0};
   CHECK(!validate(topology_from_json(bad)).empty());
   write_file(dir / "bad.json", bad.dump());
   CHECK_THROWS_AS(read_topology_file(dir / "bad.json"), ValidationError);
}

TEST_CASE("pose records round trip byte-stably")
{
   auto rng = SplitMix64(1);
   const auto& t = default_human_topology();
   std::vector<PoseRecord> recs;
   for(int i = 0; i < 5; ++i) {
      PoseRecord r;
      r.frame = i * 10;
      if(i % 2) r.activity = "Walking";
      r.kp2d = oracle::random_pose(t, rng);
      if(i % 3 == 0) {
         Pose3D p;
         for(int k = 0; k < 17; ++k) {
            p.positions.emplace_back(rng.normal(), rng.normal(), rng.uniform(2, 4));
            p.orientations.emplace_back(Vec3(rng.normal(), rng.normal(), rng.normal()),
                                        Vec3(rng.normal(), rng.normal(), rng.normal()));
         }
         r.set_pose3d(p);
      }
      recs.push_back(r);
   }
   const auto text = dump_pose_records(recs);
   const auto parsed = parse_pose_records(text);
   CHECK(parsed == recs);
   CHECK(dump_pose_records(parsed) == text);

   const auto dir = scratch_dir("poses");
   write_pose_file(dir / "p.jsonl", recs);
   CHECK(read_pose_file(dir / "p.jsonl") == recs);

   // pos3d without rot6d reads back identity orientations
   PoseRecord r = recs[0];
   r.rot6d.reset();
   const auto p3 = r.pose3d();
   REQUIRE(p3);
   CHECK(p3->orientations[4].values() == Rotation6D().values());
   CHECK(!recs[1].pose3d());
}

TEST_CASE("pose parse errors carry file and line")
{
   const auto msg = expect_validation(
       [] { parse_pose_records("{\"frame\":0,\"activity\":null,\"kp2d\":[[0,0]],\"pos3d\":null,\"rot6d\":null}\n{oops\n", "x.jsonl"); });
   CHECK(msg.find("x.jsonl:2") == 0);
   CHECK_THROWS_AS(parse_pose_records(R"({"frame":0,"kp2d":[[0,0]],"bogus":1})"),
                   ValidationError);
   CHECK_THROWS_AS(parse_pose_records(R"({"frame":0,"activity":null,"kp2d":[[0]],"pos3d":null,"rot6d":null})"),
                   ValidationError);
   try {
      read_pose_file("/nonexistent/dir/poses.jsonl");
      FAIL("expected IoError");
   } catch(const IoError& e) {
      CHECK(std::string(e.what()).find("/nonexistent/dir/poses.jsonl") != std::string::npos);
   }
}

TEST_CASE("SKIM layout and round trip")
{
   SkeletonImage img(2, 3, 2);
   for(size_t i = 0; i < img.size(); ++i) img.values()[i] = double(i) / 16.0;
   const auto bytes = encode_skim(img);
   REQUIRE(bytes.size() == 4 + 1 + 12 + 12 * 4);
   CHECK(bytes.substr(0, 4) == "SKIM");
   CHECK(uint8_t(bytes[4]) == 1);
   CHECK(uint8_t(bytes[5]) == 2);
   CHECK(uint8_t(bytes[9]) == 3);
   CHECK(uint8_t(bytes[13]) == 2);
   // value 1/16 = 0x3D800000 little endian, second float
   CHECK(uint8_t(bytes[17 + 4 + 3]) == 0x3D);
   CHECK(uint8_t(bytes[17 + 4 + 2]) == 0x80);

   const auto back = decode_skim(bytes);
   CHECK(back.same_shape(img));
   CHECK(std::equal(back.values().begin(), back.values().end(), img.values().begin()));
   CHECK(encode_skim(back) == bytes);

   auto rng = SplitMix64(2);
   const auto r = render(oracle::random_pose(default_human_topology(), rng),
                         default_human_topology(), "5ch", {});
   const auto e1 = encode_skim(r);
   CHECK(encode_skim(decode_skim(e1)) == e1);
   const auto q = quantize_f32(r);
   const auto d1 = decode_skim(e1);
   CHECK(std::ranges::equal(d1.values(), q.values()));

   CHECK_THROWS_AS(decode_skim("SKIN"), ValidationError);
   CHECK_THROWS_AS(decode_skim(bytes.substr(0, bytes.size() - 1)), ValidationError);
   auto v2 = bytes;
   v2[4] = 2;
   CHECK_THROWS_AS(decode_skim(v2), ValidationError);

   const auto dir = scratch_dir("skim");
   write_skim(dir / "a.skim", r);
   CHECK(encode_skim(read_skim(dir / "a.skim")) == e1);
}

TEST_CASE("PNG export")
{
   SkeletonImage img(2, 4, 3, "2ch");
   for(size_t i = 0; i < img.size(); ++i) img.values()[i] = double(i) / double(img.size() - 1);
   const auto dir = scratch_dir("png") / "nested";
   const auto files = write_channel_pngs(dir, img, "x");
   REQUIRE(files.size() == 2);
   CHECK(files[1].filename() == "x_ch1.png");

   png_image pi{};
   pi.version = PNG_IMAGE_VERSION;
   REQUIRE(png_image_begin_read_from_file(&pi, files[1].c_str()));
   CHECK(pi.width == 4);
   CHECK(pi.height == 3);
   pi.format = PNG_FORMAT_GRAY;
   std::vector<uint8_t> px(PNG_IMAGE_SIZE(pi));
   REQUIRE(png_image_finish_read(&pi, nullptr, px.data(), 0, nullptr));
   for(size_t i = 0; i < px.size(); ++i)
      CHECK(px[i] == uint8_t(std::lround(255.0 * img.plane(1)[i])));

   write_composite_png(dir / "c.png", img);
   CHECK(fs::file_size(dir / "c.png") > 0);
}

TEST_CASE("config defaults, overrides and errors")
{
   const auto def = config_from_json(nlohmann::json::object());
   CHECK(def.adam.lr == 2e-4);
   CHECK(def.render.gamma == 250.0);
   CHECK(def.camera.fov_deg == 62.0);
   CHECK(def.weights.w_rec_sk == 1000.0);
   CHECK(def.weights.w_pos == 10.0);
   CHECK(def.fit.max_steps == 2000);

   const auto c = config_from_json(nlohmann::json::parse(R"({
      "render": {"gamma": 100, "width": 64, "height": 32},
      "adam": {"preset": "e2e", "clip_norm": 2},
      "generator": {"count": 5, "depth_range": [3, 4]},
      "fit": {"max_steps": 10}
   })"));
   CHECK(c.render.gamma == 100.0);
   CHECK(c.camera.width == 64);
   CHECK(c.camera.height == 32);
   CHECK(c.generator.render.width == 64);
   CHECK(c.adam.lr == 2e-5);
   CHECK(c.adam.clip_norm == 2.0);
   CHECK(c.generator.count == 5);
   CHECK(c.fit.max_steps == 10);

   CHECK(config_from_json(config_to_json(c)).adam.clip_norm == 2.0);
   CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));

   CHECK(expect_validation([] { config_from_json(nlohmann::json::parse(R"({"adam":{"lr2":1}})")); })
         .find("adam.lr2") != std::string::npos);
   CHECK(expect_validation([] { config_from_json(nlohmann::json::parse(R"({"render":{"gamma":"x"}})")); })
         .find("render.gamma") != std::string::npos);
   CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"nope":{}})")), ValidationError);
   CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"adam":{"beta1":1.5}})")),
                   ValidationError);
   CHECK_THROWS_AS(read_config_file("/nonexistent.json"), IoError);
}
