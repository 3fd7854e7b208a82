#include "skelimg/cli.hpp"
#include "skelimg/io.hpp"
#include "skelimg/synth.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <sstream>

using namespace skelimg;
namespace fs = std::filesystem;

namespace {

struct Run
{
   int code;
   std::string out, err;
};

Run cli(std::vector<std::string> args)
{
   std::ostringstream out, err;
   const int code = run_cli(args, out, err);
   return {code, out.str(), err.str()};
}

fs::path work_dir()
{
   static const fs::path dir = [] {
      const auto d = fs::temp_directory_path() / "skelimg_test_cli";
      fs::remove_all(d);
      fs::create_directories(d);
      return d;
   }();
   return dir;
}

std::string at(const char* name) { return (work_dir() / name).string(); }

void make_dataset()
{
   static bool done = false;
   if(done) return;
   REQUIRE(cli({"synth", "--out-dir", at("ds"), "--count", "4", "--seed", "9"}).code == 0);
   const auto recs = read_pose_file(at("ds/poses.jsonl"));
   write_pose_file(at("one.jsonl"), std::span(recs.data(), 1));
   auto flipped = recs[0];
   flipped.kp2d = flip_pose(flipped.kp2d, default_human_topology());
   write_pose_file(at("one_flipped.jsonl"), std::span(&flipped, 1));
   done = true;
}

} // namespace

TEST_CASE("version and usage")
{
   const auto v = cli({"--version"});
   CHECK(v.code == 0);
   CHECK(v.out.find(k_version) != std::string::npos);
   CHECK(v.out.find("SKIM v1") != std::string::npos);
   CHECK(cli({}).code == exit_validation);
   CHECK(cli({"frobnicate"}).code == exit_validation);
   CHECK(cli({"synth", "--help"}).code == 0);
}

TEST_CASE("synth is deterministic")
{
   make_dataset();
   REQUIRE(cli({"synth", "--out-dir", at("ds2"), "--count", "4", "--seed", "9", "--threads", "2"}).code == 0);
   for(const char* f : {"poses.jsonl", "manifest.json", "targets/000003.skim"})
      CHECK(read_file(work_dir() / "ds" / f) == read_file(work_dir() / "ds2" / f));
}

TEST_CASE("render")
{
   make_dataset();
   REQUIRE(cli({"render", at("one.jsonl"), "--out", at("a.skim"), "--png-dir", at("png")}).code == 0);
   REQUIRE(cli({"render", at("one.jsonl"), "--out", at("b.skim")}).code == 0);
   CHECK(read_file(at("a.skim")) == read_file(at("b.skim")));
   CHECK(read_file(at("a.skim")) == read_file(at("ds/targets/000000.skim")));
   CHECK(fs::exists(at("png/a_ch4.png")));
   CHECK(fs::exists(at("png/a_composite.png")));

   // 1ch cannot see the label flip, 5ch can
   REQUIRE(cli({"render", at("one.jsonl"), "--layout", "1ch", "--out", at("c.skim")}).code == 0);
   REQUIRE(cli({"render", at("one_flipped.jsonl"), "--layout", "1ch", "--out", at("d.skim")}).code == 0);
   CHECK(read_file(at("c.skim")) == read_file(at("d.skim")));
   REQUIRE(cli({"render", at("one_flipped.jsonl"), "--out", at("e.skim")}).code == 0);
   CHECK(read_file(at("a.skim")) != read_file(at("e.skim")));

   const auto missing = cli({"render", "/nonexistent/p.jsonl", "--out", at("x.skim")});
   CHECK(missing.code == exit_io);
   CHECK(missing.err.find("/nonexistent/p.jsonl") != std::string::npos);
   CHECK(cli({"render", at("one.jsonl"), "--layout", "9ch", "--out", at("x.skim")}).code
         == exit_validation);
   CHECK(cli({"render", at("one.jsonl"), "--index", "5", "--out", at("x.skim")}).code
         == exit_validation);
}

TEST_CASE("fit")
{
   make_dataset();
   const auto r = cli({"fit", at("ds/targets/000000.skim"), "--init", at("one.jsonl"), "--out",
                       at("fit.json"), "--pose-out", at("fit.jsonl"), "--curve-csv", at("curve.csv")});
   REQUIRE(r.code == 0);
   const auto j = nlohmann::json::parse(read_file(at("fit.json")));
   CHECK(j["mode"] == "fit2d");
   CHECK(j["termination"] == "converged");
   CHECK(j["final_loss"].get<double>() < 1e-9);
   const auto fitted = read_pose_file(at("fit.jsonl"));
   const auto truth = read_pose_file(at("one.jsonl"));
   for(size_t k = 0; k < 17; ++k)
      CHECK((fitted[0].kp2d.keypoints[k] - truth[0].kp2d.keypoints[k]).norm() * 128 < 0.01);
   CHECK(j["loss_curve"].size() == size_t(j["steps"].get<int>() + 1));
   CHECK(j["pose"]["kp2d"].size() == 17);
   CHECK(read_file(at("curve.csv")).rfind("step,loss\n0,", 0) == 0);
   CHECK(fitted.size() == 1);

   const auto j3 = cli({"fit", at("ds/targets/000000.skim"), "--mode", "fit3d", "--init",
                        at("one.jsonl"), "--max-steps", "20"});
   REQUIRE(j3.code == 0);
   CHECK(nlohmann::json::parse(j3.out)["pose"]["pos3d"].size() == 17);

   const auto d = cli({"fit", at("ds/targets/000000.skim"), "--init", at("one.jsonl"),
                       "--init-noise", "0.05", "--lr", "1e300", "--out", at("div.json")});
   CHECK(d.code == exit_divergence);
   CHECK(nlohmann::json::parse(read_file(at("div.json")))["termination"] == "diverged");

   CHECK(cli({"fit", at("ds/targets/000000.skim"), "--init", at("one.jsonl"), "--layout", "3ch"}).code
         == exit_validation);
   CHECK(cli({"fit", at("nope.skim"), "--init", at("one.jsonl")}).code == exit_io);
   CHECK(cli({"fit", at("ds/targets/000000.skim"), "--init", at("one.jsonl"), "--mode", "fit9"}).code
         == exit_validation);
}

TEST_CASE("eval")
{
   make_dataset();
   const auto same = cli({"eval", at("ds/poses.jsonl"), at("ds/poses.jsonl")});
   REQUIRE(same.code == 0);
   CHECK(same.out == "activity,mean_ignore,median_ignore,mean_consider,median_consider,frames\n"
                     "all,0.00,0.00,0.00,0.00,4\n");
   CHECK(cli({"eval", at("ds/poses.jsonl"), at("ds/poses.jsonl")}).out == same.out);

   const auto fl = cli({"eval", at("one_flipped.jsonl"), at("one.jsonl"), "--policy", "consider"});
   REQUIRE(fl.code == 0);
   CHECK(fl.out.find("mean_ignore") == std::string::npos);
   CHECK(cli({"eval", at("one_flipped.jsonl"), at("one.jsonl"), "--policy", "ignore"}).out
         == "activity,mean_ignore,median_ignore,frames\nall,0.00,0.00,1\n");
   CHECK(cli({"eval", at("one.jsonl"), at("ds/poses.jsonl")}).code == exit_validation);
   CHECK(cli({"eval", at("one.jsonl"), at("one.jsonl"), "--policy", "sideways"}).code
         == exit_validation);
}

TEST_CASE("config file")
{
   make_dataset();
   write_file(at("bad.json"), R"({"adam": {"lr2": 1}})");
   const auto r = cli({"--config", at("bad.json"), "synth", "--out-dir", at("x")});
   CHECK(r.code == exit_validation);
   CHECK(r.err.find("adam.lr2") != std::string::npos);

   write_file(at("small.json"), R"({"render": {"width": 32, "height": 32}, "generator": {"count": 2}})");
   REQUIRE(cli({"--config", at("small.json"), "synth", "--out-dir", at("small")}).code == 0);
   CHECK(read_skim(at("small/targets/000001.skim")).width() == 32);
   CHECK(!fs::exists(at("small/targets/000002.skim")));
   // flags win over the file
   REQUIRE(cli({"synth", "--config", at("small.json"), "--count", "3", "--out-dir", at("small3")}).code == 0);
   CHECK(fs::exists(at("small3/targets/000002.skim")));
}

TEST_CASE("gradcheck")
{
   const auto ok = cli({"gradcheck", "--samples", "200", "--seed", "3"});
   CHECK(ok.code == 0);
   for(const char* c : {"render", "projection", "supervised"})
      CHECK(ok.out.find(c) != std::string::npos);
   CHECK(ok.out.find("max_rel=") != std::string::npos);
   const auto bad = cli({"gradcheck", "--samples", "50", "--corrupt"});
   CHECK(bad.code == exit_check_failed);
   CHECK(bad.out.find("FAIL") != std::string::npos);
}
