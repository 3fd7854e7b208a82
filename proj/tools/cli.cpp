#include "skelimg/cli.hpp"

#include "skelimg/config.hpp"
#include "skelimg/errors.hpp"
#include "skelimg/fit.hpp"
#include "skelimg/gradcheck.hpp"
#include "skelimg/io.hpp"
#include "skelimg/kinematics.hpp"
#include "skelimg/metrics.hpp"
#include "skelimg/png_export.hpp"
#include "skelimg/rng.hpp"
#include "skelimg/synth.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>

namespace skelimg {
namespace {

struct Globals
{
   std::string config_file;
   std::string topology_file;
   unsigned threads = 0;
};

struct Context
{
   CliConfig cfg;
   SkeletonTopology topo;
   unsigned threads = 0;
};

Context load_context(const Globals& g)
{
   Context ctx;
   if(!g.config_file.empty()) ctx.cfg = read_config_file(g.config_file);
   ctx.topo = g.topology_file.empty() ? default_human_topology()
                                      : read_topology_file(g.topology_file);
   require_valid(ctx.topo);
   ctx.threads = g.threads;
   return ctx;
}

const PoseRecord& pick_record(const std::vector<PoseRecord>& recs, size_t index,
                              const std::string& path)
{
   if(index >= recs.size())
      throw ValidationError(
          fmt::format("{}: record {} requested, file has {}", path, index, recs.size()));
   return recs[index];
}

// ---------------------------------------------------------------------- render

struct RenderArgs
{
   std::string pose_file;
   std::string layout = "5ch";
   std::string out;
   std::string png_dir;
   size_t index = 0;
};

int cmd_render(const Globals& g, const RenderArgs& a, std::ostream& out)
{
   const Context ctx = load_context(g);
   const auto recs = read_pose_file(a.pose_file);
   const auto& rec = pick_record(recs, a.index, a.pose_file);
   const auto img = render(rec.kp2d, ctx.topo, a.layout, ctx.cfg.render);
   write_skim(a.out, img);
   if(!a.png_dir.empty()) {
      const auto stem = std::filesystem::path(a.out).stem().string();
      write_channel_pngs(a.png_dir, img, stem);
      write_composite_png(std::filesystem::path(a.png_dir) / (stem + "_composite.png"), img);
   }
   fmt::print(out, "wrote {} ({} x {} x {})\n", a.out, img.channels(), img.width(),
              img.height());
   return exit_ok;
}

// ------------------------------------------------------------------------- fit

struct FitArgs
{
   std::string target;
   std::string mode = "fit2d";
   std::string layout = "5ch";
   std::string init;
   size_t index = 0;
   double init_noise = 0.0;
   uint64_t seed = 0;
   std::string bone_ref;
   std::string out;
   std::string pose_out;
   std::string curve_csv;
   std::optional<double> lr;
   std::optional<int> max_steps;
};

std::vector<double> reference_lengths(const Context& ctx, const FitArgs& a)
{
   if(!a.bone_ref.empty()) {
      const auto recs = read_pose_file(a.bone_ref);
      const auto p = pick_record(recs, 0, a.bone_ref).pose3d();
      if(!p) throw ValidationError(fmt::format("{}: record 0 has no pos3d", a.bone_ref));
      return bone_lengths(*p, ctx.topo);
   }
   const RestOffsets rest = configured_rest(ctx.cfg.generator, ctx.topo);
   std::vector<double> out;
   for(const auto& o : rest.offsets) out.push_back(o.norm());
   return out;
}

int cmd_fit(const Globals& g, const FitArgs& a, std::ostream& out)
{
   Context ctx = load_context(g);
   AdamConfig adam = ctx.cfg.adam;
   if(a.lr) adam.lr = *a.lr;
   check_adam(adam);
   if(a.init_noise < 0.0) throw ValidationError("--init-noise must be >= 0");

   FitProblem pr;
   pr.target = read_skim(a.target);
   pr.target.set_layout(a.layout);
   pr.mode = to_fit_mode(a.mode);
   pr.topology = ctx.topo;
   pr.layout = a.layout;
   pr.render = ctx.cfg.render;
   pr.render.width = pr.target.width();
   pr.render.height = pr.target.height();
   pr.camera = ctx.cfg.camera;
   pr.camera.width = pr.target.width();
   pr.camera.height = pr.target.height();
   pr.weights = ctx.cfg.weights;
   pr.max_steps = a.max_steps.value_or(ctx.cfg.fit.max_steps);
   pr.tol = ctx.cfg.fit.tol;
   pr.window = ctx.cfg.fit.window;
   pr.position_scale = ctx.cfg.fit.position_scale;

   const auto recs = read_pose_file(a.init);
   const auto& rec = pick_record(recs, a.index, a.init);
   auto rng = SplitMix64::stream(a.seed, a.index);
   if(pr.mode == FitMode::fit2d) {
      Pose2D init = rec.kp2d;
      for(auto& k : init.keypoints)
         for(int d = 0; d < 2; ++d) k[d] += a.init_noise * rng.normal();
      pr.init = init;
   } else {
      auto init = rec.pose3d();
      if(!init) throw ValidationError(fmt::format("{}: fit3d needs pos3d in the init", a.init));
      // noise in image units at the root depth
      const double s = a.init_noise * init->positions.front().z() / pr.camera.focal();
      for(auto& p : init->positions)
         for(int d = 0; d < 3; ++d) p[d] += s * rng.normal();
      pr.init = *init;
      if(ctx.cfg.fit.bone_prior_weight > 0.0)
         pr.bone_prior = BonePrior{reference_lengths(ctx, a), ctx.cfg.fit.bone_prior_weight};
   }

   const FitResult result = fit(pr, adam);
   const std::string json = fit_result_to_json(result).dump(2) + "\n";
   if(a.out.empty())
      out << json;
   else
      write_file(a.out, json);
   if(!a.pose_out.empty()) {
      PoseRecord fitted;
      fitted.frame = rec.frame;
      fitted.activity = rec.activity;
      if(const auto* p2 = std::get_if<Pose2D>(&result.pose)) {
         fitted.kp2d = *p2;
      } else {
         const auto& p3 = std::get<Pose3D>(result.pose);
         fitted.set_pose3d(p3);
         fitted.kp2d = project(p3, pr.camera);
      }
      write_pose_file(a.pose_out, std::span(&fitted, 1));
   }
   if(!a.curve_csv.empty()) write_file(a.curve_csv, loss_curve_csv(result));
   if(result.termination == Termination::diverged)
      throw DivergenceError(fmt::format("fit diverged after {} steps", result.steps));
   return exit_ok;
}

// ------------------------------------------------------------------------ eval

struct EvalArgs
{
   std::string pred;
   std::string gt;
   std::string policy = "both";
   std::string out;
   bool rmse = false;
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out)
{
   const Context ctx = load_context(g);
   const auto pred = read_pose_file(a.pred);
   const auto gt = read_pose_file(a.gt);
   std::map<int64_t, const PoseRecord*> by_frame;
   for(const auto& r : pred)
      if(!by_frame.emplace(r.frame, &r).second)
         throw ValidationError(fmt::format("{}: duplicate frame {}", a.pred, r.frame));
   if(gt.empty()) throw ValidationError(fmt::format("{}: no frames", a.gt));

   std::vector<FrameError> frames;
   for(const auto& r : gt) {
      const auto it = by_frame.find(r.frame);
      if(it == by_frame.end())
         throw ValidationError(fmt::format("{}: frame {} missing", a.pred, r.frame));
      auto fe = frame_error(it->second->kp2d, r.kp2d, ctx.topo, ctx.cfg.render.width,
                            ctx.cfg.render.height);
      fe.frame = r.frame;
      fe.activity = r.activity;
      frames.push_back(std::move(fe));
   }
   CsvOptions opts;
   opts.rmse = a.rmse;
   opts.ignore = a.policy != "consider";
   opts.consider = a.policy != "ignore";
   const std::string csv = report_csv(aggregate(frames), opts);
   if(a.out.empty())
      out << csv;
   else
      write_file(a.out, csv);
   return exit_ok;
}

// ----------------------------------------------------------------------- synth

struct SynthArgs
{
   std::string out_dir;
   std::optional<uint64_t> seed;
   std::optional<int> count;
};

int cmd_synth(const Globals& g, const SynthArgs& a, std::ostream& out)
{
   Context ctx = load_context(g);
   GeneratorConfig gen = ctx.cfg.generator;
   if(a.seed) gen.seed = *a.seed;
   if(a.count) gen.count = *a.count;
   const Dataset ds = generate(gen, ctx.topo, ctx.threads);
   write_dataset(a.out_dir, ds, gen);
   fmt::print(out, "wrote {} samples to {}\n", ds.records.size(), a.out_dir);
   return exit_ok;
}

// ------------------------------------------------------------------- gradcheck

int cmd_gradcheck(const GradcheckOptions& opts, std::ostream& out)
{
   if(opts.samples < 1) throw ValidationError("--samples must be >= 1");
   bool ok = true;
   for(const auto& c : run_gradcheck(opts)) {
      fmt::print(out, "{:<11} max_rel={:.3e} tol={:.0e} checked={} excluded={} failed={} {}\n",
                 c.name, c.max_rel, c.tolerance, c.checked, c.excluded, c.failed,
                 c.pass() ? "PASS" : "FAIL");
      ok = ok && c.pass();
   }
   return ok ? exit_ok : exit_check_failed;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
   CLI::App app{"Multi-channel skeleton images: render, fit, evaluate, synthesize."};
   app.name("skelimg");
   app.require_subcommand(1);
   app.fallthrough();

   Globals g;
   bool version = false;
   app.add_option("--config", g.config_file, "JSON config file");
   app.add_option("--topology", g.topology_file, "topology JSON (default: 17-joint human)");
   app.add_option("--threads", g.threads, "worker threads, 0 = all cores");
   app.add_flag("--version", version, "print versions and exit");

   RenderArgs ra;
   auto* render_cmd = app.add_subcommand("render", "render a pose into a SKIM image");
   render_cmd->add_option("pose-file", ra.pose_file, "pose JSON-lines")->required();
   render_cmd->add_option("--layout", ra.layout, "channel layout")->capture_default_str();
   render_cmd->add_option("--out", ra.out, "output .skim")->required();
   render_cmd->add_option("--png-dir", ra.png_dir, "also write PNGs here");
   render_cmd->add_option("--index", ra.index, "record to render")->capture_default_str();

   FitArgs fa;
   auto* fit_cmd = app.add_subcommand("fit", "fit a pose to a target image");
   fit_cmd->add_option("target", fa.target, "target .skim")->required();
   fit_cmd->add_option("--mode", fa.mode, "fit2d or fit3d")->capture_default_str();
   fit_cmd->add_option("--layout", fa.layout, "channel layout of the target")
       ->capture_default_str();
   fit_cmd->add_option("--init", fa.init, "initial pose (JSON-lines)")->required();
   fit_cmd->add_option("--index", fa.index, "record of --init")->capture_default_str();
   fit_cmd->add_option("--init-noise", fa.init_noise,
                       "Gaussian noise added to the init, normalized image units");
   fit_cmd->add_option("--seed", fa.seed, "noise seed")->capture_default_str();
   fit_cmd->add_option("--bone-ref", fa.bone_ref,
                       "pose file whose first record sets fit3d bone lengths");
   fit_cmd->add_option("--out", fa.out, "result JSON (default: stdout)");
   fit_cmd->add_option("--pose-out", fa.pose_out, "fitted pose as JSON-lines");
   fit_cmd->add_option("--curve-csv", fa.curve_csv, "loss curve as CSV");
   fit_cmd->add_option("--lr", fa.lr, "learning rate override");
   fit_cmd->add_option("--max-steps", fa.max_steps, "step limit override");

   EvalArgs ea;
   auto* eval_cmd = app.add_subcommand("eval", "per-activity error table");
   eval_cmd->add_option("pred", ea.pred, "predicted poses")->required();
   eval_cmd->add_option("gt", ea.gt, "ground-truth poses")->required();
   eval_cmd->add_option("--policy", ea.policy, "ignore, consider or both")
       ->check(CLI::IsMember({"ignore", "consider", "both"}))
       ->capture_default_str();
   eval_cmd->add_option("--out", ea.out, "CSV file (default: stdout)");
   eval_cmd->add_flag("--rmse", ea.rmse, "add root-mean columns");

   SynthArgs sa;
   auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
   synth_cmd->add_option("--out-dir", sa.out_dir, "output directory")->required();
   synth_cmd->add_option("--seed", sa.seed, "seed override");
   synth_cmd->add_option("--count", sa.count, "sample count override");

   GradcheckOptions go;
   auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");
   gc_cmd->add_option("--samples", go.samples, "probes per component")->capture_default_str();
   gc_cmd->add_option("--seed", go.seed, "probe seed")->capture_default_str();
   gc_cmd->add_flag("--corrupt", go.corrupt)->group(""); // negative control

   if(std::find(args.begin(), args.end(), "--version") != args.end()) {
      fmt::print(out, "skelimg {} (SKIM v{}, pose JSON-lines v1)\n", k_version,
                 int(k_skim_version));
      return exit_ok;
   }

   try {
      std::vector<std::string> rev(args.rbegin(), args.rend());
      app.parse(rev);
   } catch(const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
   } catch(const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
   } catch(const CLI::ParseError& e) {
      app.exit(e, out, err);
      return exit_validation;
   }

   try {
      if(*render_cmd) return cmd_render(g, ra, out);
      if(*fit_cmd) return cmd_fit(g, fa, out);
      if(*eval_cmd) return cmd_eval(g, ea, out);
      if(*synth_cmd) return cmd_synth(g, sa, out);
      if(*gc_cmd) return cmd_gradcheck(go, out);
   } catch(const IoError& e) {
      fmt::print(err, "error: {}\n", e.what());
      return exit_io;
   } catch(const DivergenceError& e) {
      fmt::print(err, "error: {}\n", e.what());
      return exit_divergence;
   } catch(const std::exception& e) {
      fmt::print(err, "error: {}\n", e.what());
      return exit_validation;
   }
   return exit_validation;
}

} // namespace skelimg
