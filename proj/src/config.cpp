#include "skelimg/config.hpp"

#include "skelimg/errors.hpp"
#include "skelimg/io.hpp"

#include <fmt/format.h>

#include <set>

namespace skelimg {

using nlohmann::json;

namespace {

// Reads the members of one JSON object, tracking which keys were consumed so
// leftovers can be reported as unknown.
class ObjectReader
{
 public:
   ObjectReader(const json& j, std::string path)
       : j_(j)
       , path_(std::move(path))
   {
      if(!j.is_object()) throw ValidationError(fmt::format("{}: expected an object", where()));
   }

   // Reject keys that were never looked up.
   void finish() const
   {
      for(const auto& [k, v] : j_.items())
         if(!seen_.count(k))
            throw ValidationError(fmt::format("{}: unknown key", key_path(k)));
   }

   const json* find(const std::string& key)
   {
      seen_.insert(key);
      const auto it = j_.find(key);
      return it == j_.end() ? nullptr : &*it;
   }

   std::string key_path(const std::string& key) const
   {
      return path_.empty() ? key : path_ + "." + key;
   }

   void read(const std::string& key, double& out)
   {
      if(const auto* v = find(key)) {
         if(!v->is_number())
            throw ValidationError(fmt::format("{}: expected a number", key_path(key)));
         out = v->get<double>();
      }
   }

   template<typename Int>
      requires std::is_integral_v<Int>
   void read(const std::string& key, Int& out)
   {
      if(const auto* v = find(key)) {
         if(!v->is_number_integer())
            throw ValidationError(fmt::format("{}: expected an integer", key_path(key)));
         out = v->get<Int>();
      }
   }

   void read(const std::string& key, bool& out)
   {
      if(const auto* v = find(key)) {
         if(!v->is_boolean())
            throw ValidationError(fmt::format("{}: expected true or false", key_path(key)));
         out = v->get<bool>();
      }
   }

   void read(const std::string& key, std::string& out)
   {
      if(const auto* v = find(key)) {
         if(!v->is_string())
            throw ValidationError(fmt::format("{}: expected a string", key_path(key)));
         out = v->get<std::string>();
      }
   }

   void read(const std::string& key, std::array<double, 2>& out)
   {
      if(const auto* v = find(key)) {
         if(!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
            throw ValidationError(fmt::format("{}: expected [lo, hi]", key_path(key)));
         out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
      }
   }

 private:
   std::string where() const { return path_.empty() ? "config" : path_; }

   const json& j_;
   std::string path_;
   std::set<std::string> seen_;
};

template<typename Fn> void section(ObjectReader& root, const std::string& key, Fn&& fn)
{
   if(const auto* v = root.find(key)) {
      ObjectReader r(*v, root.key_path(key));
      fn(r);
      r.finish();
   }
}

// Re-throw a check_* failure with the section name in front.
template<typename Fn> void checked(const char* what, Fn&& fn)
{
   try {
      fn();
   } catch(const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", what, e.what()));
   }
}

} // namespace

void sync_config(CliConfig& cfg)
{
   cfg.camera.width = cfg.render.width;
   cfg.camera.height = cfg.render.height;
   cfg.generator.camera = cfg.camera;
   cfg.generator.render = cfg.render;
   cfg.generator.augment = cfg.augment;
}

CliConfig config_from_json(const json& j)
{
   CliConfig cfg;
   {
      ObjectReader root(j, "");
      section(root, "render", [&](ObjectReader& r) {
         r.read("gamma", cfg.render.gamma);
         r.read("width", cfg.render.width);
         r.read("height", cfg.render.height);
      });
      section(root, "camera", [&](ObjectReader& r) { r.read("fov_deg", cfg.camera.fov_deg); });
      section(root, "augment", [&](ObjectReader& r) {
         r.read("crop_scale_range", cfg.augment.crop_scale_range);
         r.read("crop_offset_range", cfg.augment.crop_offset_range);
         r.read("limb_scale_range", cfg.augment.limb_scale_range);
         r.read("seed", cfg.augment.seed);
      });
      section(root, "adam", [&](ObjectReader& r) {
         std::string preset;
         r.read("preset", preset);
         if(preset == "e2e")
            cfg.adam = AdamConfig::e2e();
         else if(preset == "pretrain")
            cfg.adam = AdamConfig::pretrain();
         else if(!preset.empty())
            throw ValidationError(fmt::format(
                "{}: unknown preset '{}' (expected pretrain or e2e)", r.key_path("preset"), preset));
         r.read("lr", cfg.adam.lr);
         r.read("beta1", cfg.adam.beta1);
         r.read("beta2", cfg.adam.beta2);
         r.read("epsilon", cfg.adam.epsilon);
         r.read("clip_norm", cfg.adam.clip_norm);
         r.read("lr_decay", cfg.adam.lr_decay);
         r.read("steps_per_epoch", cfg.adam.steps_per_epoch);
         r.read("batch_size", cfg.adam.batch_size);
      });
      section(root, "loss_weights", [&](ObjectReader& r) {
         auto& w = cfg.weights;
         r.read("w_sk", w.w_sk);
         r.read("w_pos_2d", w.w_pos_2d);
         r.read("w_pos_3d", w.w_pos_3d);
         r.read("w_orient_3d", w.w_orient_3d);
         r.read("w_rec_sk", w.w_rec_sk);
         r.read("w_rec_sk_proj", w.w_rec_sk_proj);
         r.read("w_disc_sk", w.w_disc_sk);
         r.read("w_perc_img", w.w_perc_img);
         r.read("w_disc_img", w.w_disc_img);
         r.read("w_disc_img_fm", w.w_disc_img_fm);
         r.read("w_pos", w.w_pos);
         r.read("w_orient", w.w_orient);
      });
      section(root, "generator", [&](ObjectReader& r) {
         auto& g = cfg.generator;
         r.read("seed", g.seed);
         r.read("count", g.count);
         r.read("rest_pose_file", g.rest_pose_file);
         r.read("limb_limit_deg", g.limb_limit_deg);
         r.read("spine_limit_deg", g.spine_limit_deg);
         r.read("depth_range", g.depth_range);
         r.read("lateral_jitter", g.lateral_jitter);
         r.read("frame_margin", g.frame_margin);
         r.read("max_placement_tries", g.max_placement_tries);
         r.read("render_targets", g.render_targets);
         r.read("layout", g.layout);
      });
      section(root, "fit", [&](ObjectReader& r) {
         r.read("max_steps", cfg.fit.max_steps);
         r.read("tol", cfg.fit.tol);
         r.read("window", cfg.fit.window);
         r.read("bone_prior_weight", cfg.fit.bone_prior_weight);
         r.read("position_scale", cfg.fit.position_scale);
      });
      root.finish();
   }
   sync_config(cfg);
   checked("render", [&] { check_params(cfg.render); });
   checked("camera", [&] { check_camera(cfg.camera); });
   checked("augment", [&] { check_augment(cfg.augment); });
   checked("adam", [&] { check_adam(cfg.adam); });
   checked("loss_weights", [&] { check_weights(cfg.weights); });
   checked("generator", [&] { check_generator(cfg.generator); });
   if(cfg.fit.max_steps < 0) throw ValidationError("fit.max_steps: must be >= 0");
   if(cfg.fit.window < 1) throw ValidationError("fit.window: must be >= 1");
   if(!(cfg.fit.bone_prior_weight >= 0.0))
      throw ValidationError("fit.bone_prior_weight: must be >= 0");
   return cfg;
}

CliConfig read_config_file(const std::filesystem::path& path)
{
   const auto text = read_file(path);
   json j;
   try {
      j = json::parse(text);
   } catch(const json::parse_error& e) {
      throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
   }
   try {
      return config_from_json(j);
   } catch(const ValidationError& e) {
      throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
   }
}

nlohmann::ordered_json generator_to_json(const GeneratorConfig& g)
{
   nlohmann::ordered_json j;
   j["seed"] = g.seed;
   j["count"] = g.count;
   j["rest_pose_file"] = g.rest_pose_file;
   j["limb_limit_deg"] = g.limb_limit_deg;
   j["spine_limit_deg"] = g.spine_limit_deg;
   j["depth_range"] = g.depth_range;
   j["lateral_jitter"] = g.lateral_jitter;
   j["frame_margin"] = g.frame_margin;
   j["max_placement_tries"] = g.max_placement_tries;
   j["render_targets"] = g.render_targets;
   j["layout"] = g.layout;
   j["augment"] = {{"crop_scale_range", g.augment.crop_scale_range},
                   {"crop_offset_range", g.augment.crop_offset_range},
                   {"limb_scale_range", g.augment.limb_scale_range},
                   {"seed", g.augment.seed}};
   j["camera"] = {{"fov_deg", g.camera.fov_deg},
                  {"width", g.camera.width},
                  {"height", g.camera.height}};
   j["render"] = {{"gamma", g.render.gamma},
                  {"width", g.render.width},
                  {"height", g.render.height}};
   return j;
}

nlohmann::ordered_json config_to_json(const CliConfig& cfg)
{
   nlohmann::ordered_json j;
   j["render"] = {{"gamma", cfg.render.gamma},
                  {"width", cfg.render.width},
                  {"height", cfg.render.height}};
   j["camera"] = {{"fov_deg", cfg.camera.fov_deg}};
   j["augment"] = {{"crop_scale_range", cfg.augment.crop_scale_range},
                   {"crop_offset_range", cfg.augment.crop_offset_range},
                   {"limb_scale_range", cfg.augment.limb_scale_range},
                   {"seed", cfg.augment.seed}};
   const auto& a = cfg.adam;
   j["adam"] = {{"lr", a.lr},
                {"beta1", a.beta1},
                {"beta2", a.beta2},
                {"epsilon", a.epsilon},
                {"clip_norm", a.clip_norm},
                {"lr_decay", a.lr_decay},
                {"steps_per_epoch", a.steps_per_epoch},
                {"batch_size", a.batch_size}};
   const auto& w = cfg.weights;
   j["loss_weights"] = {{"w_sk", w.w_sk},
                        {"w_pos_2d", w.w_pos_2d},
                        {"w_pos_3d", w.w_pos_3d},
                        {"w_orient_3d", w.w_orient_3d},
                        {"w_rec_sk", w.w_rec_sk},
                        {"w_rec_sk_proj", w.w_rec_sk_proj},
                        {"w_disc_sk", w.w_disc_sk},
                        {"w_perc_img", w.w_perc_img},
                        {"w_disc_img", w.w_disc_img},
                        {"w_disc_img_fm", w.w_disc_img_fm},
                        {"w_pos", w.w_pos},
                        {"w_orient", w.w_orient}};
   auto gen = generator_to_json(cfg.generator);
   gen.erase("augment");
   gen.erase("camera");
   gen.erase("render");
   j["generator"] = gen;
   j["fit"] = {{"max_steps", cfg.fit.max_steps},
               {"tol", cfg.fit.tol},
               {"window", cfg.fit.window},
               {"bone_prior_weight", cfg.fit.bone_prior_weight},
               {"position_scale", cfg.fit.position_scale}};
   return j;
}

} // namespace skelimg
