// serialize.cpp

#include "trimul/serialize.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace trimul {
namespace {

constexpr const char* kVersionTag = "trimul 0.1.0";

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json cert_json(const Certificate& cert) {
  ordered_json j;
  j["kind"] = certificate_kind_name(cert.kind);
  switch (cert.kind) {
    case Certificate::Kind::level_band:
      j["r"] = cert.r;
      j["sup"] = cert.sup;
      break;
    case Certificate::Kind::slice:
      j["axis"] = cert.axis;
      j["threshold"] = cert.threshold;
      break;
    case Certificate::Kind::residual:
      j["threshold"] = cert.threshold;
      break;
    case Certificate::Kind::size_leaf:
      j["target"] = cert.target;
      break;
    case Certificate::Kind::diagonal:
      j["fiber_bound"] = cert.fiber_bound;
      break;
    case Certificate::Kind::root:
      break;
  }
  return j;
}

std::string type_letters(unsigned type, int axes) {
  std::string s;
  for (int r = 0; r < axes; ++r) s += (type >> r) & 1u ? 'M' : 'F';
  return s;
}

double json_number(const ordered_json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw std::invalid_argument("expected numeric field '" + key + "'");
  return j[key].get<double>();
}

struct StageClock {
  std::chrono::steady_clock::time_point mark =
      std::chrono::steady_clock::now();

  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(now - mark).count();
    mark = now;
    return ms;
  }
};

void check(std::ostream& out, int& failures, bool ok, const std::string& name) {
  out << (ok ? "ok   - " : "FAIL - ") << name << "\n";
  if (!ok) ++failures;
}

}  // namespace

ordered_json to_json(const WaveletSystem& sys) {
  ordered_json j;
  j["family_order"] = sys.K;
  j["support_len"] = sys.support_len;
  j["resolution_levels"] = sys.resolution_levels;
  ordered_json filter = ordered_json::array();
  for (Eigen::Index i = 0; i < sys.filter.size(); ++i)
    filter.push_back(sys.filter[i]);
  j["filter"] = filter;
  j["father_digest"] = to_hex(fnv1a64(sys.phi_F_samples.data(),
                                      sizeof(double) * sys.phi_F_samples.size()));
  j["mother_digest"] = to_hex(fnv1a64(sys.phi_M_samples.data(),
                                      sizeof(double) * sys.phi_M_samples.size()));
  return j;
}

ordered_json to_json(const PartitionTree& tree) {
  ordered_json nodes = ordered_json::array();
  for (const auto& node : tree.nodes) {
    ordered_json nj;
    nj["op"] = node.op;
    nj["size"] = node.set.size();
    nj["certificate"] = cert_json(node.cert);
    nj["children"] = node.children;
    if (node.children.empty()) {
      ordered_json entries = ordered_json::array();
      for (const auto& e : node.set.entries)
        entries.push_back({e.first[0], e.first[1], e.first[2], e.second});
      nj["entries"] = entries;
    }
    nodes.push_back(std::move(nj));
  }
  ordered_json j;
  j["d"] = tree.nodes.empty() ? 1 : tree.nodes.front().set.d;
  j["nodes"] = nodes;
  return j;
}

ordered_json to_json(const SweepReport& r) {
  ordered_json pts = ordered_json::array();
  for (const auto& p : r.points) {
    ordered_json pj;
    pj["m_norm_q"] = p.m_norm_q;
    pj["envelope"] = p.envelope;
    pj["estimate"] = p.estimate;
    pj["ratio"] = p.ratio;
    pts.push_back(std::move(pj));
  }
  ordered_json j;
  j["q"] = r.q;
  j["loglog_slope"] = r.loglog_slope;
  j["max_ratio"] = r.max_ratio;
  j["points"] = pts;
  return j;
}

ordered_json to_json(const GrowthReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    ordered_json rj;
    rj["N"] = row.N;
    rj["A_N"] = row.A_N;
    rj["B_N"] = row.B_N;
    rj["ci_half_width"] = row.ci_half_width;
    rj["best_value"] = row.best_value;
    rows.push_back(std::move(rj));
  }
  ordered_json j;
  j["slope_A"] = r.slope_A;
  j["slope_B"] = r.slope_B;
  j["rows"] = rows;
  return j;
}

ordered_json to_json(const BoundaryReport& r) {
  ordered_json checkpoints = ordered_json::array();
  for (const auto& c : r.checkpoints)
    checkpoints.push_back({c.first, c.second});
  ordered_json j;
  j["q"] = r.q;
  j["L_max"] = r.L_max;
  j["checkpoints"] = checkpoints;
  j["ratio10"] = r.ratio10;
  j["ratio_decades"] = r.ratio_decades;
  if (std::isfinite(r.tail_fraction))
    j["tail_fraction"] = r.tail_fraction;
  else
    j["tail_fraction"] = nullptr;
  j["verdict"] = r.verdict;
  return j;
}

std::string coeff_tensor_jsonl(const CoeffTensor& c) {
  std::string out;
  for (const auto& e : c.entries) {
    ordered_json j;
    j["j"] = e.first.j;
    j["G"] = e.first.type_string();
    j["n"] = std::vector<int>(e.first.n.data(),
                              e.first.n.data() + e.first.n.size());
    j["b"] = e.second;
    out += j.dump();
    out += '\n';
  }
  return out;
}

CoeffTensor coeff_tensor_from_jsonl(const std::string& text, int d) {
  if (d != 1)
    throw std::invalid_argument("coeff_tensor_from_jsonl: d = 1 only");
  CoeffTensor c;
  c.source_meta = "jsonl";
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                  ": " + e.what());
    }
    FrameIndex idx;
    idx.j = static_cast<int>(json_number(j, "j"));
    if (!j.contains("G") || !j["G"].is_string() || !j.contains("n") ||
        !j["n"].is_array())
      throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                  ": needs G string and n array");
    const std::string g = j["G"].get<std::string>();
    const auto& n = j["n"];
    if (g.size() != static_cast<std::size_t>(3 * d) || n.size() != g.size())
      throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                  ": axis count mismatch");
    idx.type = 0;
    idx.n.resize(static_cast<int>(g.size()));
    for (std::size_t r = 0; r < g.size(); ++r) {
      if (g[r] == 'M')
        idx.type |= 1u << r;
      else if (g[r] != 'F')
        throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                    ": bad type letter");
      idx.n[static_cast<int>(r)] = n[r].get<int>();
    }
    if (!idx.valid())
      throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                  ": invalid scale/type combination");
    const double b = json_number(j, "b");
    if (!c.entries.emplace(idx, b).second)
      throw std::invalid_argument("coeff line " + std::to_string(line_no) +
                                  ": duplicate index");
    c.j_max = std::max(c.j_max, idx.j);
  }
  return c;
}

std::string output_field_csv(const OutputField& f) {
  std::string out = "x,re,im,abs\n";
  for (Eigen::Index i = 0; i < f.samples.size(); ++i) {
    out += format_g17(f.x_grid[i]);
    out += ',';
    out += format_g17(f.samples[i].real());
    out += ',';
    out += format_g17(f.samples[i].imag());
    out += ',';
    out += format_g17(std::abs(f.samples[i]));
    out += '\n';
  }
  return out;
}

std::string growth_csv(const GrowthReport& r) {
  std::string out = "N,A_N,B_N,ci_half_width\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.N);
    out += ',';
    out += format_g17(row.A_N);
    out += ',';
    out += format_g17(row.B_N);
    out += ',';
    out += format_g17(row.ci_half_width);
    out += '\n';
  }
  return out;
}

std::string digest_hex(const std::string& content) {
  return to_hex(fnv1a64(content));
}

std::string atomic_write(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec)
      throw io_error("cannot create directory " +
                     path.parent_path().string() + ": " + ec.message());
  }
  std::random_device rd;
  const fs::path tmp =
      path.string() + ".tmp-" + to_hex(static_cast<std::uint64_t>(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw io_error("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw io_error("cannot rename into " + path.string() + ": " +
                   ec.message());
  }
  return digest_hex(content);
}

ExperimentConfig load_config(const std::optional<std::string>& config_path,
                             const std::string& kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  if (!config_path) return cfg;

  std::ifstream in(*config_path, std::ios::binary);
  if (!in) throw io_error("cannot read config " + *config_path);
  std::stringstream buf;
  buf << in.rdbuf();
  ordered_json j;
  try {
    j = ordered_json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be an object");

  for (const auto& kv : j.items()) {
    const std::string& key = kv.key();
    const ordered_json& v = kv.value();
    auto want_int = [&](long long lo, long long hi) {
      if (!v.is_number_integer())
        throw std::invalid_argument("config: '" + key + "' must be integer");
      const auto x = v.get<long long>();
      if (x < lo || x > hi)
        throw std::invalid_argument("config: '" + key + "' out of range");
      return x;
    };
    if (key == "d") cfg.d = static_cast<int>(want_int(1, 3));
    else if (key == "q") {
      if (!v.is_number())
        throw std::invalid_argument("config: 'q' must be a number");
      cfg.q = v.get<double>();
      if (!(cfg.q > 0.0))
        throw std::invalid_argument("config: 'q' must be positive");
    } else if (key == "j_max") cfg.j_max = static_cast<int>(want_int(1, 12));
    else if (key == "grid") cfg.grid = static_cast<int>(want_int(4, 1024));
    else if (key == "family_order")
      cfg.family_order = static_cast<int>(want_int(1, 8));
    else if (key == "seed")
      cfg.seed = static_cast<std::uint64_t>(want_int(0, (1ll << 62)));
    else if (key == "trials") cfg.trials = static_cast<int>(want_int(1, 4096));
    else if (key == "L_max") cfg.L_max = want_int(1000, 4000000000ll);
    else if (key == "multiplier") {
      if (!v.is_string())
        throw std::invalid_argument("config: 'multiplier' must be a string");
      cfg.multiplier = v.get<std::string>();
    } else if (key == "partition_size")
      cfg.partition_size = static_cast<int>(want_int(1, 2000000));
    else if (key == "out_dir") {
      if (!v.is_string())
        throw std::invalid_argument("config: 'out_dir' must be a string");
      cfg.out_dir = v.get<std::string>();
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ordered_json to_json(const RunManifest& m) {
  ordered_json j;
  j["version"] = m.version_tag;
  j["config"] = m.config_echo;
  j["wall_ms"] = m.wall_ms;
  ordered_json stages = ordered_json::array();
  for (const auto& s : m.stage_ms) stages.push_back({s.first, s.second});
  j["stage_ms"] = stages;
  ordered_json files = ordered_json::object();
  for (const auto& f : m.file_digests) files[f.first] = f.second;
  j["files"] = files;
  return j;
}

RunManifest run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  if (config.d != 1)
    throw refusal_error("run_experiment: only the desk scale d = 1 is "
                        "implemented");

  RunManifest manifest;
  manifest.version_tag = kVersionTag;
  {
    ordered_json echo;
    echo["kind"] = config.kind;
    echo["d"] = config.d;
    echo["q"] = config.q;
    echo["j_max"] = config.j_max;
    echo["grid"] = config.grid;
    echo["family_order"] = config.family_order;
    echo["seed"] = config.seed;
    echo["trials"] = config.trials;
    echo["L_max"] = config.L_max;
    echo["multiplier"] = config.multiplier;
    echo["partition_size"] = config.partition_size;
    echo["out_dir"] = config.out_dir;
    manifest.config_echo = echo;
  }

  const fs::path out_dir(config.out_dir);
  StageClock wall, stage;
  auto emit = [&](const std::string& name, const std::string& content) {
    manifest.file_digests.emplace_back(name,
                                       atomic_write(out_dir / name, content));
  };

  if (config.kind == "analyze") {
    const WaveletSystem sys = build_wavelet_system(config.family_order, 8);
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd hi = Eigen::VectorXd::Ones(3);
    ScalarField field;
    if (config.multiplier == "gaussian") {
      field = gaussian_field(0.35, Eigen::VectorXd::Constant(3, 0.5));
    } else if (config.multiplier == "sine-poly") {
      std::mt19937_64 rng(derive_seed(config.seed, "sine-poly"));
      field = sine_window_poly(rng);
    } else if (config.multiplier == "zero") {
      field = [](const Eigen::VectorXd&) { return 0.0; };
    } else {
      throw std::invalid_argument("analyze: unknown multiplier '" +
                                  config.multiplier + "'");
    }
    const MultiplierGrid m = sample_grid(1, lo, hi, config.grid, field);
    manifest.stage_ms.emplace_back("sample", stage.lap());

    const CoeffTensor c = analyze(m, sys, config.j_max);
    manifest.stage_ms.emplace_back("analyze", stage.lap());

    ordered_json report;
    report["wavelet"] = to_json(sys);
    report["coefficient_count"] = c.entries.size();
    report["sup_abs"] = c.sup_abs();
    const double m_norm = grid_lq_norm(m, config.q);
    report["m_norm_q"] = m_norm;
    report["frame_norm_lq"] = frame_norm_lq(c, config.q, sys);
    if (m_norm > 0.0) {
      const CoeffBoundReport bounds = lq_coeff_bound_check(c, config.q, m_norm);
      ordered_json rows = ordered_json::array();
      for (const auto& row : bounds.rows) {
        ordered_json rj;
        rj["j"] = row.j;
        rj["G"] = type_letters(row.type, 3);
        rj["lq_norm"] = row.lq_norm;
        rj["envelope"] = row.envelope;
        rj["ratio"] = row.ratio;
        rj["flagged"] = row.flagged;
        rows.push_back(std::move(rj));
      }
      report["bound_rows"] = rows;
      report["bound_max_ratio"] = bounds.max_ratio;
    } else {
      report["bound_rows"] = nullptr;
    }
    try {
      report["decay_slope"] = decay_slope(c);
    } catch (const refusal_error&) {
      report["decay_slope"] = nullptr;
    }
    try {
      const SummabilityReport audit =
          summability_audit(c, config.q, sys.K, 1, m_norm);
      ordered_json aj;
      aj["r_ratio"] = audit.r_ratio;
      aj["r_decay_ok"] = audit.r_decay_ok;
      aj["measured_sup_slope"] = audit.measured_sup_slope;
      aj["j_term_slope"] = audit.j_term_slope;
      aj["j_decay_ok"] = audit.j_decay_ok;
      aj["stated_condition_ok"] = audit.stated_condition_ok;
      aj["total"] = audit.total;
      report["summability"] = aj;
    } catch (const std::exception&) {
      report["summability"] = nullptr;
    }
    emit("coeffs.jsonl", coeff_tensor_jsonl(c));
    emit("report.json", report.dump(2) + "\n");
    manifest.stage_ms.emplace_back("reports", stage.lap());
  } else if (config.kind == "partition") {
    std::mt19937_64 rng(derive_seed(config.seed, "partition"));
    std::uniform_int_distribution<int> coord(-20, 20);
    std::uniform_real_distribution<double> mag(0.0, 12.0);
    std::vector<std::pair<TripleKey, double>> entries;
    std::set<TripleKey> used;
    while (entries.size() < static_cast<std::size_t>(config.partition_size)) {
      Eigen::VectorXi k(1);
      TripleKey key;
      for (int slot = 0; slot < 3; ++slot) {
        k[0] = coord(rng);
        key[slot] = pack_coord(k);
      }
      if (!used.insert(key).second) continue;
      entries.emplace_back(key, std::exp2(-mag(rng)));
    }
    const WeightedIndexSet set = make_weighted_set(1, std::move(entries));
    manifest.stage_ms.emplace_back("sample", stage.lap());

    const PartitionTree tree = full_partition(set, config.q);
    const std::string verify = verify_tree(tree);
    manifest.stage_ms.emplace_back("partition", stage.lap());

    ordered_json report;
    report["entry_count"] = set.size();
    report["node_count"] = tree.nodes.size();
    report["leaf_count"] = tree.leaves().size();
    report["verify"] = verify;
    report["tree"] = to_json(tree);
    emit("partition.json", report.dump(2) + "\n");
    manifest.stage_ms.emplace_back("reports", stage.lap());
    if (!verify.empty())
      throw refusal_error("partition verification failed: " + verify);
  } else if (config.kind == "bound-sweep") {
    std::mt19937_64 rng(derive_seed(config.seed, "family"));
    const Eigen::VectorXd lo = Eigen::VectorXd::Zero(3);
    const Eigen::VectorXd hi = Eigen::VectorXd::Ones(3);
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> amp(0.2, 2.0);
    std::vector<MultiplierGrid> family;
    for (int i = 0; i < 8; ++i) {
      const ScalarField mix = gaussian_mix(rng, lo, hi, count(rng));
      const double a = amp(rng);
      family.push_back(sample_grid(
          1, lo, hi, config.grid,
          [mix, a](const Eigen::VectorXd& x) { return a * mix(x); }));
    }
    manifest.stage_ms.emplace_back("sample", stage.lap());

    const SweepReport sweep = sufficiency_sweep(
        family, config.q, config.trials, 3 * config.trials, config.seed);
    manifest.stage_ms.emplace_back("sweep", stage.lap());

    emit("sweep.json", to_json(sweep).dump(2) + "\n");
    manifest.stage_ms.emplace_back("reports", stage.lap());
  } else if (config.kind == "necessity") {
    std::vector<int> N_range;
    for (int N = 2; N <= 8; ++N) N_range.push_back(N);
    const GrowthReport growth =
        growth_fit(N_range, 32 * config.trials, config.seed);
    manifest.stage_ms.emplace_back("growth", stage.lap());

    emit("growth.json", to_json(growth).dump(2) + "\n");
    emit("growth.csv", growth_csv(growth));
    manifest.stage_ms.emplace_back("reports", stage.lap());
  } else if (config.kind == "boundary") {
    const BoundaryReport boundary = lq_boundary_check(config.q, config.L_max);
    manifest.stage_ms.emplace_back("sum", stage.lap());

    emit("boundary.json", to_json(boundary).dump(2) + "\n");
    manifest.stage_ms.emplace_back("reports", stage.lap());
  } else {
    throw std::invalid_argument("run_experiment: unknown kind '" +
                                config.kind + "'");
  }

  manifest.wall_ms = wall.lap();
  atomic_write(out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

int run_selftest(std::ostream& out) {
  int failures = 0;

  check(out, failures,
        required_smoothness(1.0, 1) == 2 && required_smoothness(2.0, 1) == 4 &&
            required_smoothness(2.9, 1) == 31,
        "smoothness threshold values");

  {
    FrameIndex idx;
    idx.n = Eigen::VectorXi::Zero(3);
    idx.j = 0;
    idx.type = 0;
    bool ok = idx.valid();
    idx.type = 3;
    ok = ok && !idx.valid();
    idx.j = 2;
    ok = ok && idx.valid();
    idx.type = 0;
    ok = ok && !idx.valid();
    check(out, failures, ok, "frame index scale/type validity");
  }

  {
    Eigen::VectorXi k(1);
    bool ok = true;
    for (int v : {-37, 0, 1, 515}) {
      k[0] = v;
      ok = ok && unpack_coord(pack_coord(k), 1)[0] == v;
    }
    check(out, failures, ok, "coordinate pack round trip");
  }

  check(out, failures,
        std::abs(v_weight(3) - std::sqrt(std::log(2.0)) / 2.0) < 1e-15,
        "weight sequence value at l = 3");

  {
    BlockSequences seqs;
    seqs.N = 2;
    const bool ok = std::abs(convolution_sum(seqs, 12) - 0.125) < 1e-15 &&
                    std::abs(convolution_sum(seqs, 15) - 1.25) < 1e-15 &&
                    convolution_sum(seqs, 11) == 0.0 &&
                    convolution_sum(seqs, 22) == 0.0;
    check(out, failures, ok, "block convolution exact values");
  }

  check(out, failures,
        psi_plateau(0.0) == 1.0 &&
            psi_plateau(kPsiPlateauHalfwidth) == 1.0 &&
            psi_plateau(kPsiJHalfwidth) == 0.0 &&
            psi_plateau(0.3) > 0.0 && psi_plateau(0.3) < 1.0,
        "window plateau and support");

  check(out, failures,
        bump_profile(0.0) == 1.0 && bump_profile(1.0) == 0.0 &&
            bump_profile(-1.0) == 0.0 && bump_profile(0.5) > 0.0,
        "bump profile normalization");

  check(out, failures, fnv1a64(std::string()) == 14695981039346656037ull,
        "digest offset basis");

  {
    const std::vector<double> xs = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> ys = {2.0, 4.0, 6.0, 8.0};
    check(out, failures, std::abs(lsq_slope(xs, ys) - 2.0) < 1e-12,
          "least squares slope on an exact line");
  }

  {
    OutputField f;
    f.x_grid = make_x_grid(0.0, 0.25, 4);
    f.samples = Eigen::ArrayXcd::Constant(4, cd(3.0, 0.0));
    f.cell_volume = 0.25;
    check(out, failures, std::abs(quasi_norm(f, 2.0) - 3.0) < 1e-12,
          "quasi-norm of a constant field");
  }

  return failures;
}

}  // namespace trimul
