// Drives the installed CLI binary (path in AIRTREE_CLI) through its
// subcommands: exit codes, error categories, record schemas, and cleanup of
// partial outputs.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() {
  const char* path = std::getenv("AIRTREE_CLI");
  REQUIRE_MESSAGE(path != nullptr, "AIRTREE_CLI not set");
  return path;
}

struct Workspace {
  fs::path dir;

  Workspace() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("airtree_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream out(dir / name);
    out << text;
  }
};

struct RunResult {
  int exit_code;
  std::string stderr_text;
};

RunResult run(const Workspace& ws, const std::string& args) {
  const std::string err = ws.path("stderr.txt");
  const std::string cmd = cli() + " " + args + " 2> " + err;
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err);
  std::ostringstream ss;
  ss << in.rdbuf();
  return RunResult{WEXITSTATUS(raw), ss.str()};
}

json read_first_record(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  return json::parse(line);
}

void make_phantom(const Workspace& ws, const std::string& extra = "") {
  ws.write("phantom.cfg",
           "nx = 64\nny = 64\nnz = 64\ndepth = 3\nroot_radius = 4\n"
           "radius_decay = 0.6\nsegment_length = 13\nbranch_angle = 31\n"
           "seed = 11\n" + extra);
  const RunResult r =
      run(ws, "phantom --spec " + ws.path("phantom.cfg") + " --out " +
                  ws.path("data"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
}

}  // namespace

TEST_CASE("cli: phantom emits label, centerline, and hu volumes") {
  Workspace ws;
  make_phantom(ws);
  CHECK(fs::exists(ws.path("data/label.mha")));
  CHECK(fs::exists(ws.path("data/centerline.mha")));
  CHECK(fs::exists(ws.path("data/hu.mha")));
}

TEST_CASE("cli: normalize then gdt emits truncated and raw fields") {
  Workspace ws;
  make_phantom(ws);
  RunResult r = run(ws, "normalize --in " + ws.path("data/hu.mha") +
                            " --lo -1000 --hi 600 --out " + ws.path("norm.mha"));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(ws.path("norm.mha")));

  r = run(ws, "gdt --ct " + ws.path("data/hu.mha") + " --stage1 " +
                  ws.path("data/label.mha") + " --th 512 --metric grayvalue" +
                  " --out " + ws.path("gdt.mha"));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(ws.path("gdt.mha")));
  CHECK(fs::exists(ws.path("gdt_raw.mha")));
}

TEST_CASE("cli: skeletonize accepts masks and writes masks") {
  Workspace ws;
  make_phantom(ws);
  const RunResult r = run(ws, "skeletonize --in " + ws.path("data/label.mha") +
                                  " --out " + ws.path("skel.mha"));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(ws.path("skel.mha")));
}

TEST_CASE("cli: fuse with mismatched dims fails with DIM_MISMATCH, no output") {
  Workspace ws;
  make_phantom(ws);
  Workspace ws2;
  ws2.write("phantom.cfg",
            "nx = 48\nny = 48\nnz = 48\ndepth = 2\nroot_radius = 3\n"
            "segment_length = 10\nseed = 2\n");
  const RunResult gen = run(ws2, "phantom --spec " + ws2.path("phantom.cfg") +
                                     " --out " + ws2.path("data"));
  REQUIRE(gen.exit_code == 0);

  const RunResult r =
      run(ws, "fuse --pf " + ws.path("data/label.mha") + " --pg " +
                  ws2.path("data/label.mha") + " --mode g2f --out " +
                  ws.path("fused.mha") + " --report " + ws.path("fusion.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("DIM_MISMATCH") != std::string::npos);
  CHECK(r.stderr_text.find('\n') == r.stderr_text.size() - 1);  // single line
  CHECK_FALSE(fs::exists(ws.path("fused.mha")));
  CHECK_FALSE(fs::exists(ws.path("fusion.json")));
}

TEST_CASE("cli: fuse and metrics records carry a schema version") {
  Workspace ws;
  make_phantom(ws, "breakages = 2\n");
  REQUIRE(fs::exists(ws.path("data/pf.mha")));
  REQUIRE(fs::exists(ws.path("data/pg.mha")));

  RunResult r = run(ws, "fuse --pf " + ws.path("data/pf.mha") + " --pg " +
                            ws.path("data/pg.mha") + " --mode g2f --out " +
                            ws.path("fused.mha") + " --report " +
                            ws.path("fusion.json"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
  const json fusion = read_first_record(ws.path("fusion.json"));
  CHECK(fusion["schema_version"] == 1);
  CHECK(fusion["mode"] == "g2f");
  CHECK(fusion["breakages_before"] == 2);
  CHECK(fusion["breakages_after"] == 0);

  r = run(ws, "metrics --pred " + ws.path("fused.mha") + " --label " +
                  ws.path("data/label.mha") + " --tb 0.8 --out " +
                  ws.path("eval.json"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
  const json eval = read_first_record(ws.path("eval.json"));
  CHECK(eval["schema_version"] == 1);
  CHECK(eval["precision_pct"] == 100.0);
  CHECK(eval["branch_threshold"] == 0.8);

  // Records append rather than overwrite.
  r = run(ws, "metrics --pred " + ws.path("fused.mha") + " --label " +
                  ws.path("data/label.mha") + " --tb 0.8 --out " +
                  ws.path("eval.json"));
  REQUIRE(r.exit_code == 0);
  std::ifstream in(ws.path("eval.json"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 2);
}

TEST_CASE("cli: sensitivity emits k+1 points per requested loss") {
  Workspace ws;
  ws.write("phantom.cfg",
           "nx = 80\nny = 80\nnz = 80\ndepth = 4\nroot_radius = 3.5\n"
           "radius_decay = 0.6\nsegment_length = 13\nbranch_angle = 31\n"
           "seed = 11\n");
  const RunResult gen = run(ws, "phantom --spec " + ws.path("phantom.cfg") +
                                    " --out " + ws.path("data"));
  REQUIRE_MESSAGE(gen.exit_code == 0, gen.stderr_text);
  const RunResult r =
      run(ws, "sensitivity --label " + ws.path("data/label.mha") +
                  " --losses bs,dice,ce --k 10 --seed 3 --out " +
                  ws.path("curves.json"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
  const json record = read_first_record(ws.path("curves.json"));
  REQUIRE(record["curves"].size() == 3);
  for (const auto& curve : record["curves"]) {
    CHECK(curve["k"].size() == 11);
    CHECK(curve["r"].size() == 11);
    CHECK(curve["r"][0] == 0.0);
  }
}

TEST_CASE("cli: unknown config keys are BAD_CONFIG") {
  Workspace ws;
  ws.write("bad.cfg", "nx = 32\nny = 32\nnz = 32\nwhat_is_this = 1\n");
  const RunResult r =
      run(ws, "phantom --spec " + ws.path("bad.cfg") + " --out " +
                  ws.path("data"));
  CHECK(r.exit_code == 6);
  CHECK(r.stderr_text.find("BAD_CONFIG") != std::string::npos);
  CHECK(r.stderr_text.find("what_is_this") != std::string::npos);
}

TEST_CASE("cli: pipeline runs end to end and emits an eval record") {
  Workspace ws;
  make_phantom(ws, "breakages = 2\n");
  ws.write("pipeline.cfg", "ct = " + ws.path("data/hu.mha") +
                               "\nstage1 = " + ws.path("data/pg.mha") +
                               "\npf = " + ws.path("data/pf.mha") +
                               "\npg = " + ws.path("data/pg.mha") +
                               "\nlabel = " + ws.path("data/label.mha") +
                               "\noutdir = " + ws.path("out") +
                               "\nth = 512\nmode = g2f\ntb = 0.8\nseed = 11\n");
  const RunResult r = run(ws, "pipeline --config " + ws.path("pipeline.cfg"));
  REQUIRE_MESSAGE(r.exit_code == 0, r.stderr_text);
  CHECK(fs::exists(ws.path("out/gdt.mha")));
  CHECK(fs::exists(ws.path("out/gdt_raw.mha")));
  CHECK(fs::exists(ws.path("out/fused.mha")));
  const json eval = read_first_record(ws.path("out/eval.json"));
  CHECK(eval["schema_version"] == 1);
  CHECK(eval["fusion"]["breakages_after"] == 0);
  CHECK(eval["tree_length_pct"].get<double>() == doctest::Approx(100.0));
  CHECK(eval.contains("total_loss"));
}

TEST_CASE("cli: missing input file is IO_ERROR") {
  Workspace ws;
  const RunResult r = run(ws, "skeletonize --in " + ws.path("nope.mha") +
                                  " --out " + ws.path("skel.mha"));
  CHECK(r.exit_code == 5);
  CHECK(r.stderr_text.find("IO_ERROR") != std::string::npos);
}
