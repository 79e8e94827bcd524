// serialize_cli_test.cpp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "trimul/serialize.hpp"

using namespace trimul;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() /
                     ("trimul_test_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(TRIMUL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

CoeffTensor small_tensor() {
  CoeffTensor c;
  FrameIndex idx;
  idx.j = 0;
  idx.type = 0;
  idx.n = Eigen::VectorXi::Zero(3);
  c.entries[idx] = 0.1234567890123456789;
  idx.j = 2;
  idx.type = 5;
  idx.n << -3, 7, 0;
  c.entries[idx] = -1.0 / 3.0;
  idx.j = 3;
  idx.type = 7;
  idx.n << 1, 1, -8;
  c.entries[idx] = 4.9406564584124654e-324;  // denormal floor survives
  c.j_max = 3;
  return c;
}

}  // namespace

TEST_CASE("coefficient records round trip through json lines") {
  const CoeffTensor c = small_tensor();
  const std::string text = coeff_tensor_jsonl(c);
  const CoeffTensor back = coeff_tensor_from_jsonl(text, 1);
  REQUIRE(back.entries.size() == c.entries.size());
  CHECK(back.j_max == 3);
  CHECK(back.source_meta == "jsonl");
  auto it = back.entries.begin();
  for (const auto& [idx, b] : c.entries) {
    CHECK(it->first == idx);
    CHECK(it->second == b);  // 17 significant digits are lossless
    ++it;
  }
  CHECK_THROWS_AS(coeff_tensor_from_jsonl(text, 2), std::invalid_argument);
}

TEST_CASE("malformed coefficient lines name the offending line") {
  auto reject = [](const std::string& text, const char* what) {
    CAPTURE(what);
    CHECK_THROWS_AS(coeff_tensor_from_jsonl(text, 1), std::invalid_argument);
  };
  reject("{broken", "not json");
  reject(R"({"j":1,"G":"MXF","n":[0,0,0],"b":0.5})", "bad letter");
  reject(R"({"j":1,"G":"MF","n":[0,0],"b":0.5})", "axis count");
  reject(R"({"j":1,"G":"MFF","n":[0,0],"b":0.5})", "n shorter than G");
  reject(R"({"j":-1,"G":"MFF","n":[0,0,0],"b":0.5})", "negative scale");
  reject(R"({"j":0,"G":"MFF","n":[0,0,0],"b":0.5})", "mother at scale zero");
  reject(R"({"j":2,"G":"FFF","n":[0,0,0],"b":0.5})", "all father detail");
  reject(R"({"j":1,"G":"MFF","n":[0,0,0]})", "missing b");
  const std::string dup =
      R"({"j":1,"G":"MFF","n":[0,0,0],"b":0.5})" "\n"
      R"({"j":1,"G":"MFF","n":[0,0,0],"b":0.25})";
  reject(dup, "duplicate");

  // blank lines are skipped, not rejected
  const std::string padded =
      "\n" R"({"j":1,"G":"MFF","n":[0,0,0],"b":0.5})" "\n\n";
  CHECK(coeff_tensor_from_jsonl(padded, 1).entries.size() == 1);
}

TEST_CASE("csv emitters use fixed headers and lossless floats") {
  OutputField f;
  f.x_grid = Eigen::ArrayXd(2);
  f.x_grid << 0.1, 0.30000000000000004;
  f.samples = Eigen::ArrayXcd(2);
  f.samples[0] = cd(1.0 / 7.0, -2.0 / 3.0);
  f.samples[1] = cd(0.0, 1e-17);
  f.cell_volume = 0.2;
  const std::string csv = output_field_csv(f);
  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "x,re,im,abs");
  REQUIRE(std::getline(lines, line));
  // parse back the first record and compare bit for bit
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream fields(line);
  double x, re, im, mag;
  fields >> x >> re >> im >> mag;
  CHECK(x == 0.1);
  CHECK(re == 1.0 / 7.0);
  CHECK(im == -2.0 / 3.0);
  CHECK(mag == std::abs(f.samples[0]));

  GrowthReport g;
  g.rows.push_back({2, 0.25, 0.47230921548299915, 0.0, 0.3});
  const std::string gc = growth_csv(g);
  CHECK(gc.rfind("N,A_N,B_N,ci_half_width\n", 0) == 0);
  CHECK(gc.find("0.47230921548299915") != std::string::npos);
}

TEST_CASE("atomic writes create parents and report content digests") {
  const fs::path dir = fresh_dir("atomic");
  const fs::path nested = dir / "a" / "b" / "data.json";
  const std::string content = "{\"k\": 1}\n";
  const std::string digest = atomic_write(nested, content);
  CHECK(fs::exists(nested));
  CHECK(read_file(nested) == content);
  CHECK(digest == digest_hex(content));
  // no temp litter left behind
  int names = 0;
  for (const auto& e : fs::directory_iterator(nested.parent_path())) {
    (void)e;
    ++names;
  }
  CHECK(names == 1);

  // the offset basis digest of the empty string is a known constant
  CHECK(digest_hex("") == "cbf29ce484222325");

  // a regular file in the parent chain is a filesystem error
  const fs::path blocker = dir / "blocker";
  atomic_write(blocker, "x");
  CHECK_THROWS_AS(atomic_write(blocker / "child.json", "y"), io_error);
  fs::remove_all(dir);
}

TEST_CASE("config files override defaults and reject junk") {
  const ExperimentConfig defaults = load_config(std::nullopt, "analyze");
  CHECK(defaults.kind == "analyze");
  CHECK(defaults.d == 1);
  CHECK(defaults.q == 2.0);
  CHECK(defaults.j_max == 4);
  CHECK(defaults.grid == 64);
  CHECK(defaults.multiplier == "gaussian");

  const fs::path dir = fresh_dir("config");
  const fs::path good = dir / "good.json";
  atomic_write(good,
               R"({"q": 1.5, "grid": 32, "seed": 99, "out_dir": "elsewhere"})");
  const ExperimentConfig cfg = load_config(good.string(), "partition");
  CHECK(cfg.kind == "partition");
  CHECK(cfg.q == 1.5);
  CHECK(cfg.grid == 32);
  CHECK(cfg.seed == 99);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.j_max == 4);  // untouched default

  auto reject = [&](const std::string& body) {
    const fs::path p = dir / "bad.json";
    atomic_write(p, body);
    CHECK_THROWS_AS(load_config(p.string(), "analyze"), std::invalid_argument);
  };
  reject(R"({"mystery": 3})");
  reject(R"({"d": 4})");
  reject(R"({"j_max": 0})");
  reject(R"({"grid": 2000})");
  reject(R"({"q": "two"})");
  reject(R"({"q": -1.0})");
  reject(R"({"multiplier": 7})");
  reject(R"([1, 2, 3])");
  reject("not json at all");
  CHECK_THROWS_AS(load_config((dir / "absent.json").string(), "analyze"),
                  io_error);
  fs::remove_all(dir);
}

TEST_CASE("wavelet and partition reports serialize their key fields") {
  const WaveletSystem sys = build_wavelet_system(2, 8);
  const ordered_json wj = to_json(sys);
  CHECK(wj["family_order"] == 2);
  CHECK(wj["support_len"] == 3);
  CHECK(wj["resolution_levels"] == 8);
  REQUIRE(wj["filter"].is_array());
  CHECK(wj["filter"].size() == 4);
  CHECK(wj["father_digest"].is_string());
  CHECK(wj["mother_digest"].is_string());

  std::vector<std::pair<TripleKey, double>> entries;
  Eigen::VectorXi v(1);
  for (int t = 0; t < 20; ++t) {
    TripleKey k;
    v[0] = t;
    k[0] = pack_coord(v);
    v[0] = (t * 7) % 5;
    k[1] = pack_coord(v);
    v[0] = -t;
    k[2] = pack_coord(v);
    entries.emplace_back(k, std::exp2(-(t % 6)));
  }
  const PartitionTree tree =
      full_partition(make_weighted_set(1, std::move(entries)), 2.0);
  const ordered_json tj = to_json(tree);
  CHECK(tj["d"] == 1);
  REQUIRE(tj["nodes"].is_array());
  REQUIRE(tj["nodes"].size() == tree.nodes.size());
  CHECK(tj["nodes"][0]["op"] == "root");
  // leaves carry entries, internal nodes do not
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const bool leaf = tree.nodes[i].children.empty();
    CHECK(tj["nodes"][i].contains("entries") == leaf);
  }
}

TEST_CASE("an analyze run writes its reports with matching digests") {
  const fs::path dir = fresh_dir("analyze");
  ExperimentConfig cfg;
  cfg.kind = "analyze";
  cfg.grid = 16;
  cfg.j_max = 2;
  cfg.multiplier = "zero";
  cfg.out_dir = (dir / "out").string();
  const RunManifest man = run_experiment(cfg);

  REQUIRE(man.file_digests.size() == 2);
  for (const auto& [name, digest] : man.file_digests) {
    const fs::path p = fs::path(cfg.out_dir) / name;
    REQUIRE(fs::exists(p));
    CHECK(digest_hex(read_file(p)) == digest);
  }
  CHECK(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));

  const ordered_json report =
      ordered_json::parse(read_file(fs::path(cfg.out_dir) / "report.json"));
  CHECK(report["coefficient_count"] == 0);
  CHECK(report["bound_rows"].is_null());
  CHECK(report["sup_abs"] == 0.0);

  const ordered_json manifest =
      ordered_json::parse(read_file(fs::path(cfg.out_dir) / "manifest.json"));
  CHECK(manifest["version"] == "trimul 0.1.0");
  CHECK(manifest["config"]["kind"] == "analyze");
  CHECK(manifest["files"].size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("partition runs are deterministic per seed") {
  const fs::path dir = fresh_dir("partition");
  ExperimentConfig cfg;
  cfg.kind = "partition";
  cfg.partition_size = 200;
  cfg.seed = 5;
  cfg.out_dir = (dir / "one").string();
  const RunManifest first = run_experiment(cfg);
  cfg.out_dir = (dir / "two").string();
  const RunManifest second = run_experiment(cfg);
  REQUIRE(first.file_digests.size() == 1);
  REQUIRE(second.file_digests.size() == 1);
  CHECK(first.file_digests[0].second == second.file_digests[0].second);

  cfg.seed = 6;
  cfg.out_dir = (dir / "three").string();
  const RunManifest third = run_experiment(cfg);
  CHECK(third.file_digests[0].second != first.file_digests[0].second);

  ExperimentConfig wide = cfg;
  wide.d = 2;
  wide.out_dir = (dir / "wide").string();
  CHECK_THROWS_AS(run_experiment(wide), refusal_error);
  fs::remove_all(dir);
}

TEST_CASE("the command line maps outcomes to exit codes") {
  CHECK(run_cli("selftest") == 0);
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("") == 2);                      // a subcommand is required
  CHECK(run_cli("frobnicate") == 2);            // unknown subcommand
  CHECK(run_cli("analyze --no-such-flag") == 2);
  CHECK(run_cli("analyze --grid 2000") == 2);   // flag range check

  const fs::path dir = fresh_dir("cli");
  // resolution too coarse for the requested scales: a refusal
  CHECK(run_cli("analyze --grid 8 --jmax 4 --out " + (dir / "r").string()) ==
        3);
  // an output path through a regular file: an io failure
  atomic_write(dir / "wall", "x");
  CHECK(run_cli("partition --size 50 --out " +
                (dir / "wall" / "out").string()) == 4);

  // a small clean run exits zero and leaves a coherent manifest
  const fs::path out = dir / "ok";
  CHECK(run_cli("analyze --grid 16 --jmax 2 --multiplier zero --seed 4 --out " +
                out.string()) == 0);
  const ordered_json manifest =
      ordered_json::parse(read_file(out / "manifest.json"));
  CHECK(manifest["config"]["grid"] == 16);
  CHECK(manifest["config"]["seed"] == 4);
  for (const auto& item : manifest["files"].items())
    CHECK(digest_hex(read_file(out / item.key())) ==
          item.value().get<std::string>());
  fs::remove_all(dir);
}
