#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>

#include "slicedot/slicedot.hpp"

namespace slicedot::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Common {
  std::string slicer = "mc";
  Index projections = 100;
  std::uint64_t seed = 0;
  std::string projector = "linear";
  bool normalize = false;
};

void add_common(CLI::App* sub, Common& c, Index default_L = 100) {
  c.projections = default_L;
  sub->add_option("--slicer", c.slicer, "Direction generator")
      ->check(CLI::IsMember({"mc", "qmc", "spiral", "qmc-rot"}))
      ->capture_default_str();
  sub->add_option("--projections,-L", c.projections, "Number of projections")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_option("--projector", c.projector, "linear | circular:r | poly:deg")->capture_default_str();
  sub->add_flag("--normalize", c.normalize, "Rescale inputs to probability measures");
}

Projector parse_projector(const std::string& text, Index d) {
  if (text == "linear") return Projector::linear();
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "unknown projector '" + text + "'");
  const std::string arg = text.substr(colon + 1);
  try {
    if (kind == "circular") return Projector::circular(std::stod(arg));
    if (kind == "poly") return Projector::full_odd_polynomial(d, std::stoi(arg));
  } catch (const std::logic_error&) {
    fail(ErrorCode::InvalidArgument, "bad projector parameter in '" + text + "'");
  }
  fail(ErrorCode::InvalidArgument, "unknown projector '" + text + "'");
}

DirectionSet make_directions(const Common& c, Index dim) {
  if (c.slicer == "mc") return sample_uniform_sphere(dim, c.projections, c.seed);
  if (c.slicer == "qmc") return qmc_mapped(dim, c.projections, c.seed);
  if (c.slicer == "spiral") {
    if (dim != 3) fail(ErrorCode::InvalidArgument, "spiral slicer needs a 3-dimensional parameter space");
    return spiral_s2(c.projections);
  }
  return random_rotation(qmc_mapped(dim, c.projections, 0), c.seed);
}

Measure load(const std::string& path, bool normalize) {
  Measure m = io::read_points_csv_file(path);
  return normalize ? m.normalized() : m;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      fail(ErrorCode::InvalidArgument, "cannot parse number list '" + s + "'");
    }
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorCode::Numerical, std::string(what) + " is not finite");
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) { io::write_file(path, text); }

std::string points_csv(const Eigen::MatrixXd& pts) {
  std::ostringstream os;
  io::write_points_csv(os, pts);
  return os.str();
}

std::string trace_csv(const FlowTrace& trace) {
  std::ostringstream os;
  os << "step,objective\n" << std::setprecision(17);
  for (const auto& s : trace.snapshots) os << s.step << ',' << s.objective << '\n';
  return os.str();
}

// ---- dist -----------------------------------------------------------------

struct DistCfg {
  Common c;
  std::string a, b;
  double p = 2;
  std::string estimator = "mc";
  double sigma = 0.1;
  std::string energy = "exp";
  int steps = 100;
  double step_size = 0.1;
  int restarts = 4;
};

EnergySpec parse_energy(const std::string& s) {
  if (s == "exp") return energy::Exponential{};
  if (s == "const") return energy::Constant{};
  if (s.rfind("poly:", 0) == 0) {
    const auto v = parse_list(s.substr(5));
    if (v.size() != 2) fail(ErrorCode::InvalidArgument, "poly energy needs poly:a,eps");
    return energy::ShiftedPolynomial{v[0], v[1]};
  }
  fail(ErrorCode::InvalidArgument, "unknown energy '" + s + "'");
}

void cmd_dist(const DistCfg& cfg, std::ostream& out) {
  const auto t0 = Clock::now();
  const Measure mu = load(cfg.a, cfg.c.normalize), nu = load(cfg.b, cfg.c.normalize);
  const Projector proj = parse_projector(cfg.c.projector, mu.dim());
  json j;
  j["schema"] = 1;
  j["estimator"] = cfg.estimator;
  double value = 0, value_p = 0;
  std::optional<double> se;
  if (cfg.estimator == "fast") {
    value_p = sw_fast(mu, nu);
    value = std::sqrt(value_p);
  } else {
    const DirectionSet ds = make_directions(cfg.c, proj.parameter_dim(mu.dim()));
    SwEstimate est;
    if (cfg.estimator == "mc") {
      est = sw_mc(mu, nu, cfg.p, ds, proj);
    } else if (cfg.estimator == "cv-low" || cfg.estimator == "cv-up") {
      if (cfg.p != 2) fail(ErrorCode::InvalidArgument, "control variates need p = 2");
      if (!proj.is_linear()) fail(ErrorCode::InvalidArgument, "control variates need the linear projector");
      est = sw_cv(mu, nu, ds, cfg.estimator == "cv-low" ? CvVariant::Lower : CvVariant::Upper);
    } else if (cfg.estimator == "ebsw") {
      est = ebsw_is(mu, nu, cfg.p, ds, parse_energy(cfg.energy), proj);
    } else if (cfg.estimator == "smooth") {
      est = smooth_sw(mu, nu, cfg.p, cfg.sigma, ds, cfg.c.seed, proj);
    } else {
      if (!proj.is_linear()) fail(ErrorCode::InvalidArgument, "max-SW needs the linear projector");
      MaxSwOptions opt;
      opt.steps = cfg.steps;
      opt.step_size = cfg.step_size;
      opt.restarts = cfg.restarts;
      opt.warm_start = &ds;
      const auto r = max_sw_pga(mu, nu, cfg.p, opt, cfg.c.seed);
      est.value_p = r.value_p;
      est.value = r.value;
      j["theta"] = std::vector<double>(r.theta.data(), r.theta.data() + r.theta.size());
    }
    value = est.value;
    value_p = est.value_p;
    se = est.std_error;
  }
  check_finite(value_p, "distance");
  j["value"] = value;
  j["value_p"] = value_p;
  j["std_error"] = nullable(se);
  j["L"] = cfg.estimator == "fast" ? 0 : cfg.c.projections;
  j["seed"] = cfg.c.seed;
  j["wall_ms"] = elapsed_ms(t0);
  out << j.dump() << '\n';
}

// ---- plan -----------------------------------------------------------------

struct PlanCfg {
  Common c;
  std::string a, b;
  double p = 2;
  std::string method = "swgg";
  std::string theta;
  double tau = 1.0;
  std::string plan_out;
};

void cmd_plan(const PlanCfg& cfg, std::ostream& out) {
  const Measure mu = load(cfg.a, cfg.c.normalize), nu = load(cfg.b, cfg.c.normalize);
  const Projector proj = parse_projector(cfg.c.projector, mu.dim());
  const Index dprime = proj.parameter_dim(mu.dim());
  const DirectionSet ds = make_directions(cfg.c, dprime);
  Eigen::VectorXd theta = ds.theta(0);
  if (!cfg.theta.empty()) {
    const auto v = parse_list(cfg.theta);
    theta = Direction::normalized(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size())))
                .components();
    if (theta.size() != dprime) fail(ErrorCode::DimensionMismatch, "--theta has the wrong dimension");
  }
  CostAndPlan res;
  json j;
  j["schema"] = 1;
  j["method"] = cfg.method;
  bool has_theta = true;
  if (cfg.method == "lift" || cfg.method == "swgg") {
    res = swgg(mu, nu, theta, cfg.p, proj);
  } else if (cfg.method == "min-swgg") {
    auto r = min_swgg_search(mu, nu, cfg.p, ds, proj);
    theta = r.theta;
    res = {r.cost, std::move(r.plan)};
  } else if (cfg.method == "pw") {
    res = projected_wasserstein(mu, nu, cfg.p, ds, proj);
    has_theta = false;
  } else {
    res = expected_sliced_transport(mu, nu, cfg.p, cfg.tau, ds, proj);
    has_theta = false;
  }
  check_finite(res.cost, "plan cost");
  j["cost"] = res.cost;
  j["theta"] = has_theta ? json(std::vector<double>(theta.data(), theta.data() + theta.size())) : json(nullptr);
  j["entries"] = res.plan.entries.size();
  if (!cfg.plan_out.empty()) {
    std::ostringstream os;
    io::write_plan_csv(os, res.plan);
    write_text(cfg.plan_out, os.str());
    j["plan"] = cfg.plan_out;
  } else {
    json entries = json::array();
    for (const auto& e : res.plan.entries) entries.push_back({e.i, e.j, e.mass});
    j["plan"] = std::move(entries);
  }
  out << j.dump() << '\n';
}

// ---- barycenter -----------------------------------------------------------

struct BaryCfg {
  Common c;
  std::vector<std::string> inputs;
  std::string weights;
  Index atoms = 50;
  int iters = 200;
  double step = -1;
  std::string mode = "plain";
  double p = 2;
  std::string out_path;
};

void cmd_barycenter(const BaryCfg& cfg, std::ostream& out) {
  std::vector<Measure> ms;
  for (const auto& path : cfg.inputs) ms.push_back(load(path, cfg.c.normalize));
  std::vector<double> w = cfg.weights.empty() ? std::vector<double>(ms.size(), 1.0 / static_cast<double>(ms.size()))
                                              : parse_list(cfg.weights);
  DescentOptions opt;
  opt.p = cfg.p;
  opt.iters = cfg.iters;
  opt.step = cfg.step;
  opt.projections = cfg.c.projections;
  opt.seed = cfg.c.seed;
  opt.snapshot_every = std::max(1, cfg.iters / 20);
  const auto mode = cfg.mode == "fair" ? BarycenterMode::FairnessUnbiased : BarycenterMode::Plain;
  const auto res = sw_barycenter(ms, w, cfg.atoms, mode, opt);
  json j;
  j["schema"] = 1;
  j["mode"] = cfg.mode;
  j["atoms"] = cfg.atoms;
  j["iters"] = cfg.iters;
  json trace = json::array();
  for (const auto& [t, v] : res.trace) trace.push_back({t, v});
  j["objective"] = res.trace.back().second;
  check_finite(res.trace.back().second, "objective");
  j["trace"] = std::move(trace);
  if (!cfg.out_path.empty()) {
    write_text(cfg.out_path, points_csv(res.barycenter.points()));
    j["out"] = cfg.out_path;
  } else {
    j["points"] = matrix_json(res.barycenter.points());
  }
  out << j.dump() << '\n';
}

// ---- flow / idt -----------------------------------------------------------

struct FlowCfg {
  Common c;
  std::string source, target;
  int iters = 100;
  double step = -1;
  double p = 2;
  int snapshot_every = 10;
  std::string trace_out, out_path, snapshot_dir;
};

void write_flow_outputs(const FlowCfg& cfg, const FlowTrace& trace, json& j) {
  j["initial_objective"] = trace.snapshots.front().objective;
  j["final_objective"] = trace.last().objective;
  check_finite(trace.last().objective, "objective");
  if (!cfg.trace_out.empty()) write_text(cfg.trace_out, trace_csv(trace));
  if (!cfg.snapshot_dir.empty()) {
    std::filesystem::create_directories(cfg.snapshot_dir);
    for (const auto& s : trace.snapshots) {
      std::ostringstream name;
      name << "step_" << std::setw(6) << std::setfill('0') << s.step << ".csv";
      write_text((std::filesystem::path(cfg.snapshot_dir) / name.str()).string(), points_csv(s.particles));
    }
  }
  if (!cfg.out_path.empty()) {
    write_text(cfg.out_path, points_csv(trace.last().particles));
    j["out"] = cfg.out_path;
  } else {
    j["points"] = matrix_json(trace.last().particles);
  }
}

void cmd_flow(const FlowCfg& cfg, std::ostream& out) {
  const Measure src = load(cfg.source, false);
  const Measure tgt = load(cfg.target, cfg.c.normalize);
  DescentOptions opt;
  opt.p = cfg.p;
  opt.iters = cfg.iters;
  opt.step = cfg.step;
  opt.projections = cfg.c.projections;
  opt.seed = cfg.c.seed;
  opt.snapshot_every = std::max(1, cfg.snapshot_every);
  const auto trace = sw_gradient_flow(src.points(), tgt, opt);
  json j;
  j["schema"] = 1;
  j["iters"] = cfg.iters;
  write_flow_outputs(cfg, trace, j);
  out << j.dump() << '\n';
}

void cmd_idt(const FlowCfg& cfg, std::ostream& out) {
  const Measure src = load(cfg.source, false);
  const Measure tgt = load(cfg.target, false);
  const auto trace = idt(src.points(), tgt, cfg.iters, cfg.c.seed);
  json j;
  j["schema"] = 1;
  j["iters"] = cfg.iters;
  write_flow_outputs(cfg, trace, j);
  out << j.dump() << '\n';
}

// ---- color transfer -------------------------------------------------------

struct ColorCfg {
  Common c;
  std::string source, target, out_path;
  int iters = 100;
  double step = -1;
  Index max_samples = 4096;
};

Eigen::MatrixXd image_points(const io::Image& img) {
  const Index n = static_cast<Index>(img.width) * img.height;
  Eigen::MatrixXd P(n, 3);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < 3; ++k) P(i, k) = img.rgb[static_cast<std::size_t>(3 * i + k)] / 255.0;
  return P;
}

// Deterministic subsample that depends only on the pixel count.
std::vector<Index> subsample(Index n, Index cap, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  if (n <= cap) return idx;
  RngStream rng(seed, 0x636f6c6f72ull);
  for (Index k = 0; k < cap; ++k) {
    const Index pick = k + std::min(static_cast<Index>(rng.uniform() * static_cast<double>(n - k)), n - k - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
  }
  idx.resize(static_cast<std::size_t>(cap));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& P, const std::vector<Index>& idx) {
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), P.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Index>(r)) = P.row(idx[r]);
  return out;
}

void cmd_color(const ColorCfg& cfg, std::ostream& out) {
  const io::Image src = io::read_ppm_file(cfg.source);
  const io::Image tgt = io::read_ppm_file(cfg.target);
  if (cfg.max_samples < 1) fail(ErrorCode::InvalidArgument, "--max-samples must be >= 1");
  const Eigen::MatrixXd S = image_points(src), T = image_points(tgt);
  const auto si = subsample(S.rows(), cfg.max_samples, cfg.c.seed);
  const auto ti = subsample(T.rows(), cfg.max_samples, cfg.c.seed);
  const Eigen::MatrixXd X0 = rows_of(S, si);
  const Measure target = Measure::uniform(rows_of(T, ti));
  DescentOptions opt;
  opt.iters = cfg.iters;
  opt.step = cfg.step;
  opt.projections = cfg.c.projections;
  opt.seed = cfg.c.seed;
  opt.snapshot_every = std::max(1, cfg.iters);
  const auto trace = sw_gradient_flow(X0, target, opt);
  const Eigen::MatrixXd disp = trace.last().particles - X0;

  // Pixels outside the sample follow their nearest sampled color.
  std::vector<char> sampled(static_cast<std::size_t>(S.rows()), 0);
  std::vector<Index> slot(static_cast<std::size_t>(S.rows()), -1);
  for (std::size_t r = 0; r < si.size(); ++r) {
    sampled[static_cast<std::size_t>(si[r])] = 1;
    slot[static_cast<std::size_t>(si[r])] = static_cast<Index>(r);
  }
  std::unordered_map<std::uint32_t, Index> nearest_cache;
  io::Image res = src;
  for (Index i = 0; i < S.rows(); ++i) {
    Index r = slot[static_cast<std::size_t>(i)];
    if (!sampled[static_cast<std::size_t>(i)]) {
      const auto* px = &src.rgb[static_cast<std::size_t>(3 * i)];
      const std::uint32_t key = (std::uint32_t(px[0]) << 16) | (std::uint32_t(px[1]) << 8) | px[2];
      auto it = nearest_cache.find(key);
      if (it == nearest_cache.end()) {
        Index best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (Index q = 0; q < X0.rows(); ++q) {
          const double dd = (X0.row(q) - S.row(i)).squaredNorm();
          if (dd < bd) {
            bd = dd;
            best = q;
          }
        }
        it = nearest_cache.emplace(key, best).first;
      }
      r = it->second;
    }
    for (Index k = 0; k < 3; ++k) {
      const double v = std::clamp(S(i, k) + disp(r, k), 0.0, 1.0);
      res.rgb[static_cast<std::size_t>(3 * i + k)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
  }
  io::write_ppm_file(cfg.out_path, res);
  json j;
  j["schema"] = 1;
  j["width"] = res.width;
  j["height"] = res.height;
  j["samples"] = si.size();
  j["iters"] = cfg.iters;
  j["initial_objective"] = trace.snapshots.front().objective;
  j["final_objective"] = trace.last().objective;
  check_finite(trace.last().objective, "objective");
  j["out"] = cfg.out_path;
  out << j.dump() << '\n';
}

// ---- bench ----------------------------------------------------------------

struct BenchCfg {
  Common c;
  std::string a, b;
  Index n = 500, d = 3;
  int replications = 20;
  std::string grid = "10,100,1000";
  std::string estimators = "mc,qmc,qmc-rot,cv-low,cv-up,fast";
  std::string out_path;
};

void cmd_bench(const BenchCfg& cfg, std::ostream& out) {
  GaussianFixture fx = (cfg.a.empty() || cfg.b.empty())
                           ? gaussian_fixture(cfg.n, cfg.d, cfg.c.seed)
                           : GaussianFixture{load(cfg.a, cfg.c.normalize), load(cfg.b, cfg.c.normalize)};
  const Index d = fx.mu.dim();
  std::vector<std::string> ests;
  {
    std::stringstream ss(cfg.estimators);
    std::string t;
    while (std::getline(ss, t, ',')) {
      static const std::vector<std::string> known{"mc", "qmc", "qmc-rot", "cv-low", "cv-up", "fast"};
      if (std::find(known.begin(), known.end(), t) == known.end())
        fail(ErrorCode::InvalidArgument, "unknown bench estimator '" + t + "'");
      ests.push_back(t);
    }
  }
  std::ostringstream os;
  os << "estimator,L,replication,value,value_p,wall_ms\n" << std::setprecision(17);
  for (const auto& est : ests) {
    for (double Ld : parse_list(cfg.grid)) {
      const auto L = static_cast<Index>(Ld);
      if (L < 1) fail(ErrorCode::InvalidArgument, "bench grid entries must be >= 1");
      for (int r = 0; r < cfg.replications; ++r) {
        const auto t0 = Clock::now();
        const std::uint64_t rs = mix64(cfg.c.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(r) + 1);
        double vp = 0;
        if (est == "fast") {
          vp = sw_fast(fx.mu, fx.nu);
        } else if (est == "mc") {
          vp = sw_mc(fx.mu, fx.nu, 2.0, sample_uniform_sphere(d, L, rs)).value_p;
        } else if (est == "qmc") {
          vp = sw_mc(fx.mu, fx.nu, 2.0, qmc_mapped(d, L, static_cast<std::uint64_t>(r))).value_p;
        } else if (est == "qmc-rot") {
          vp = sw_mc(fx.mu, fx.nu, 2.0, random_rotation(qmc_mapped(d, L, 0), rs)).value_p;
        } else {
          vp = sw_cv(fx.mu, fx.nu, sample_uniform_sphere(d, L, rs),
                     est == "cv-low" ? CvVariant::Lower : CvVariant::Upper)
                   .value_p;
        }
        check_finite(vp, "bench value");
        os << est << ',' << L << ',' << r << ',' << std::sqrt(std::max(0.0, vp)) << ',' << vp << ','
           << std::setprecision(6) << elapsed_ms(t0) << std::setprecision(17) << '\n';
      }
    }
  }
  if (cfg.out_path.empty())
    out << os.str();
  else
    write_text(cfg.out_path, os.str());
}

// ---- sketch ---------------------------------------------------------------

struct SketchCfg {
  Common c;
  std::string input, out_path, a, b;
  int k = 200;
  double p = 2;
};

void cmd_sketch_build(const SketchCfg& cfg, std::ostream& out) {
  std::ifstream in(cfg.input);
  if (!in) fail(ErrorCode::Parse, "cannot open " + cfg.input);
  std::optional<SketchBank> bank;
  std::string line;
  std::size_t row = 0, items = 0;
  Index dim = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::optional<double> w;
    const auto vals = io::parse_row(line, row, cfg.input, &w);
    if (w) fail(ErrorCode::Parse, cfg.input + ": row " + std::to_string(row) + ": weights are not supported in streams", row);
    if (!bank) {
      dim = static_cast<Index>(vals.size());
      bank.emplace(make_directions(cfg.c, dim), cfg.k, cfg.c.seed);
    }
    if (static_cast<Index>(vals.size()) != dim)
      fail(ErrorCode::Parse, cfg.input + ": row " + std::to_string(row) + ": wrong number of coordinates", row);
    bank->insert(Eigen::Map<const Eigen::RowVectorXd>(vals.data(), dim));
    ++items;
  }
  if (!bank) fail(ErrorCode::EmptyInput, cfg.input + ": no points");
  io::write_file(cfg.out_path, io::serialize_bank(*bank));
  json j;
  j["schema"] = 1;
  j["items"] = items;
  j["d"] = dim;
  j["L"] = cfg.c.projections;
  j["k"] = cfg.k;
  j["ds_hash"] = hex64(bank->ds_hash());
  j["out"] = cfg.out_path;
  out << j.dump() << '\n';
}

void cmd_sketch_query(const SketchCfg& cfg, std::ostream& out) {
  const SketchBank a = io::deserialize_bank(io::read_file(cfg.a));
  const SketchBank b = io::deserialize_bank(io::read_file(cfg.b));
  const auto est = sw_streaming(a, b, cfg.p);
  check_finite(est.value_p, "distance");
  json j;
  j["schema"] = 1;
  j["estimator"] = "streaming";
  j["value"] = est.value;
  j["value_p"] = est.value_p;
  j["std_error"] = nullable(est.std_error);
  j["L"] = a.sketches().size();
  out << j.dump() << '\n';
}

// ---- extensions -----------------------------------------------------------

struct PairCfg {
  Common c;
  std::string a, b;
  std::string mode = "limited";
  double s = 1.0;
  double rho1 = 1.0, rho2 = 1.0, p = 2;
  int iters = 100;
};

void cmd_partial(const PairCfg& cfg, std::ostream& out) {
  const Measure mu = load(cfg.a, cfg.c.normalize), nu = load(cfg.b, cfg.c.normalize);
  const Projector proj = parse_projector(cfg.c.projector, mu.dim());
  const DirectionSet ds = make_directions(cfg.c, proj.parameter_dim(mu.dim()));
  const bool limited = cfg.mode == "limited";
  const double v = sliced_partial(mu, nu, cfg.s, ds, limited ? PartialMode::Limited : PartialMode::OneSided, proj);
  check_finite(v, "partial cost");
  json j;
  j["schema"] = 1;
  j["mode"] = cfg.mode;
  j["value"] = v;
  if (limited) {
    j["s_fraction"] = cfg.s;
    j["transported_mass"] = cfg.s * std::min(mu.mass(), nu.mass());
  } else {
    j["matched"] = std::min(mu.size(), nu.size());
  }
  j["L"] = cfg.c.projections;
  out << j.dump() << '\n';
}

void cmd_uot(const PairCfg& cfg, std::ostream& out) {
  const Measure mu = load(cfg.a, cfg.c.normalize), nu = load(cfg.b, cfg.c.normalize);
  const Projector proj = parse_projector(cfg.c.projector, mu.dim());
  const DirectionSet ds = make_directions(cfg.c, proj.parameter_dim(mu.dim()));
  const double v = suot(mu, nu, cfg.rho1, cfg.rho2, ds, cfg.iters, cfg.p, proj);
  check_finite(v, "unbalanced cost");
  json j;
  j["schema"] = 1;
  j["value"] = v;
  j["rho1"] = cfg.rho1;
  j["rho2"] = cfg.rho2;
  j["iterations"] = cfg.iters;
  j["L"] = cfg.c.projections;
  out << j.dump() << '\n';
}

void cmd_gw(const PairCfg& cfg, std::ostream& out) {
  const Measure mu = load(cfg.a, false), nu = load(cfg.b, false);
  const DirectionSet ds = make_directions(cfg.c, std::max(mu.dim(), nu.dim()));
  const double v = sgw_heuristic(mu.points(), nu.points(), ds);
  check_finite(v, "Gromov cost");
  json j;
  j["schema"] = 1;
  j["value"] = v;
  j["heuristic"] = true;
  j["L"] = cfg.c.projections;
  out << j.dump() << '\n';
}

struct MultiCfg {
  Common c;
  std::vector<std::string> inputs;
  std::string betas, kernel = "sw", reference, out_path;
  double gamma = 1.0;
  Index ref_size = 256;
};

void cmd_mmot(const MultiCfg& cfg, std::ostream& out) {
  std::vector<Measure> ms;
  for (const auto& p : cfg.inputs) ms.push_back(load(p, cfg.c.normalize));
  const std::vector<double> betas = cfg.betas.empty()
                                        ? std::vector<double>(ms.size(), 1.0 / static_cast<double>(ms.size()))
                                        : parse_list(cfg.betas);
  const Projector proj = parse_projector(cfg.c.projector, ms.front().dim());
  const DirectionSet ds = make_directions(cfg.c, proj.parameter_dim(ms.front().dim()));
  const double v = smw(ms, betas, ds, proj);
  check_finite(v, "multi-marginal cost");
  json j;
  j["schema"] = 1;
  j["value"] = v;
  j["K"] = ms.size();
  j["L"] = cfg.c.projections;
  out << j.dump() << '\n';
}

void cmd_kernel(const MultiCfg& cfg, std::ostream& out) {
  std::vector<Measure> ms;
  for (const auto& p : cfg.inputs) ms.push_back(load(p, cfg.c.normalize));
  const DirectionSet ds = make_directions(cfg.c, ms.front().dim());
  const auto kind = cfg.kernel == "usw" ? KernelKind::UnbiasedSliced : KernelKind::Sliced;
  const Eigen::MatrixXd K = gram(ms, kind, cfg.gamma, ds);
  if (!K.allFinite()) fail(ErrorCode::Numerical, "Gram matrix is not finite");
  const std::string csv = points_csv(K);
  if (cfg.out_path.empty())
    out << csv;
  else
    write_text(cfg.out_path, csv);
}

void cmd_embed(const MultiCfg& cfg, std::ostream& out) {
  if (cfg.inputs.size() != 1) fail(ErrorCode::InvalidArgument, "embed takes exactly one --input");
  const Measure mu = load(cfg.inputs.front(), cfg.c.normalize);
  Measure ref = cfg.reference.empty() ? default_reference({mu}, cfg.ref_size, cfg.c.seed)
                                      : load(cfg.reference, cfg.c.normalize);
  const DirectionSet ds = make_directions(cfg.c, mu.dim());
  const auto E = sw_embed(mu, ref, ds);
  if (!E.values.allFinite()) fail(ErrorCode::Numerical, "embedding is not finite");
  std::ostringstream os;
  os << "# ds_hash=" << hex64(E.ds_hash) << ",reference_hash=" << hex64(E.reference_hash)
     << ",L=" << E.values.rows() << ",n=" << E.values.cols() << ",slicer=" << ds.provenance_string() << '\n';
  os << points_csv(E.values);
  if (cfg.out_path.empty())
    out << os.str();
  else
    write_text(cfg.out_path, os.str());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"slicedot: sliced optimal transport toolkit", "slicedot"};
  app.require_subcommand(1);
  const auto pos = CLI::PositiveNumber;

  DistCfg dist;
  auto* s_dist = app.add_subcommand("dist", "Sliced Wasserstein distance between two point files");
  add_common(s_dist, dist.c);
  s_dist->add_option("--a", dist.a, "First CSV point file")->required()->check(CLI::ExistingFile);
  s_dist->add_option("--b", dist.b, "Second CSV point file")->required()->check(CLI::ExistingFile);
  s_dist->add_option("--p", dist.p, "Order p >= 1")->check(CLI::Range(1.0, 1e6))->capture_default_str();
  s_dist->add_option("--estimator", dist.estimator)
      ->check(CLI::IsMember({"mc", "cv-low", "cv-up", "fast", "max", "ebsw", "smooth"}))
      ->capture_default_str();
  s_dist->add_option("--sigma", dist.sigma, "Smoothing noise level")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_dist->add_option("--energy", dist.energy, "exp | const | poly:a,eps")->capture_default_str();
  s_dist->add_option("--steps", dist.steps, "Max-SW ascent steps")->check(pos)->capture_default_str();
  s_dist->add_option("--step-size", dist.step_size, "Max-SW step size")->check(pos)->capture_default_str();
  s_dist->add_option("--restarts", dist.restarts, "Max-SW restarts")->check(pos)->capture_default_str();

  PlanCfg plan;
  auto* s_plan = app.add_subcommand("plan", "Transport plan from slices (lift, swgg, pw, min-swgg, est)");
  add_common(s_plan, plan.c, 50);
  s_plan->add_option("--a", plan.a)->required()->check(CLI::ExistingFile);
  s_plan->add_option("--b", plan.b)->required()->check(CLI::ExistingFile);
  s_plan->add_option("--p", plan.p)->check(CLI::Range(1.0, 1e6))->capture_default_str();
  s_plan->add_option("--method", plan.method)
      ->check(CLI::IsMember({"lift", "swgg", "pw", "min-swgg", "est"}))
      ->capture_default_str();
  s_plan->add_option("--theta", plan.theta, "Direction for lift/swgg, comma separated");
  s_plan->add_option("--tau", plan.tau, "EST temperature")->check(CLI::NonNegativeNumber)->capture_default_str();
  s_plan->add_option("--plan-out", plan.plan_out, "Write the plan as CSV (i,j,mass) here");

  BaryCfg bary;
  auto* s_bary = app.add_subcommand("barycenter", "Free-support sliced Wasserstein barycenter");
  add_common(s_bary, bary.c, 50);
  s_bary->add_option("--input", bary.inputs, "Marginal CSV files")->required()->check(CLI::ExistingFile);
  s_bary->add_option("--weights", bary.weights, "Comma separated marginal weights (default uniform)");
  s_bary->add_option("--atoms", bary.atoms)->check(pos)->capture_default_str();
  s_bary->add_option("--iters", bary.iters)->check(CLI::NonNegativeNumber)->capture_default_str();
  s_bary->add_option("--step", bary.step, "Step size (default 0.5 d)");
  s_bary->add_option("--mode", bary.mode)->check(CLI::IsMember({"plain", "fair"}))->capture_default_str();
  s_bary->add_option("--p", bary.p)->check(CLI::Range(1.0, 1e6))->capture_default_str();
  s_bary->add_option("--out", bary.out_path, "Barycenter atoms CSV");

  FlowCfg flow;
  auto* s_flow = app.add_subcommand("flow", "Particle sliced Wasserstein gradient flow");
  add_common(s_flow, flow.c, 50);
  FlowCfg idtc;
  auto* s_idt = app.add_subcommand("idt", "Iterative distribution transfer");
  add_common(s_idt, idtc.c, 50);
  for (auto [sub, cfg] : {std::pair{s_flow, &flow}, std::pair{s_idt, &idtc}}) {
    sub->add_option("--source", cfg->source)->required()->check(CLI::ExistingFile);
    sub->add_option("--target", cfg->target)->required()->check(CLI::ExistingFile);
    sub->add_option("--iters", cfg->iters)->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--snapshot-every", cfg->snapshot_every)->check(pos)->capture_default_str();
    sub->add_option("--trace-out", cfg->trace_out, "CSV of (step, objective)");
    sub->add_option("--snapshot-dir", cfg->snapshot_dir, "Directory for per-snapshot point CSVs");
    sub->add_option("--out", cfg->out_path, "Final points CSV");
  }
  s_flow->add_option("--step", flow.step, "Step size (default 0.5 d)");
  s_flow->add_option("--p", flow.p)->check(CLI::Range(1.0, 1e6))->capture_default_str();

  ColorCfg color;
  auto* s_color = app.add_subcommand("color-transfer", "Color transfer between PPM (P6) images");
  add_common(s_color, color.c, 32);
  s_color->add_option("--source", color.source)->required()->check(CLI::ExistingFile);
  s_color->add_option("--target", color.target)->required()->check(CLI::ExistingFile);
  s_color->add_option("--out", color.out_path)->required();
  s_color->add_option("--iters", color.iters)->check(CLI::NonNegativeNumber)->capture_default_str();
  s_color->add_option("--step", color.step, "Step size (default 1.5)");
  s_color->add_option("--max-samples", color.max_samples, "Pixel subsample cap")->capture_default_str();

  BenchCfg bench;
  auto* s_bench = app.add_subcommand("bench", "Estimator replication benchmark (CSV)");
  add_common(s_bench, bench.c);
  s_bench->add_option("--a", bench.a)->check(CLI::ExistingFile);
  s_bench->add_option("--b", bench.b)->check(CLI::ExistingFile);
  s_bench->add_option("--n", bench.n, "Fixture sample size")->check(pos)->capture_default_str();
  s_bench->add_option("--d", bench.d, "Fixture dimension")->check(pos)->capture_default_str();
  s_bench->add_option("--replications", bench.replications)->check(pos)->capture_default_str();
  s_bench->add_option("--grid", bench.grid, "Comma separated L values")->capture_default_str();
  s_bench->add_option("--estimators", bench.estimators)->capture_default_str();
  s_bench->add_option("--out", bench.out_path);

  SketchCfg sk_build, sk_query;
  auto* s_sketch = app.add_subcommand("sketch", "Streaming KLL sketches per direction");
  s_sketch->require_subcommand(1);
  auto* s_build = s_sketch->add_subcommand("build", "Sketch a CSV stream");
  add_common(s_build, sk_build.c);
  s_build->add_option("--input", sk_build.input)->required()->check(CLI::ExistingFile);
  s_build->add_option("--out", sk_build.out_path)->required();
  s_build->add_option("--k", sk_build.k, "KLL base capacity")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  auto* s_query = s_sketch->add_subcommand("query", "Sliced distance between two sketch files");
  s_query->add_option("--a", sk_query.a)->required()->check(CLI::ExistingFile);
  s_query->add_option("--b", sk_query.b)->required()->check(CLI::ExistingFile);
  s_query->add_option("--p", sk_query.p)->check(CLI::Range(1.0, 1e6))->capture_default_str();

  PairCfg partial, uot, gw;
  auto* s_partial = app.add_subcommand("partial", "Sliced partial transport");
  add_common(s_partial, partial.c, 50);
  s_partial->add_option("--mode", partial.mode)->check(CLI::IsMember({"limited", "one-sided"}))->capture_default_str();
  s_partial->add_option("--s", partial.s, "Transported mass fraction (limited mode)")->capture_default_str();
  auto* s_uot = app.add_subcommand("uot", "Sliced unbalanced transport with KL penalties");
  add_common(s_uot, uot.c, 50);
  s_uot->add_option("--rho1", uot.rho1)->check(pos)->capture_default_str();
  s_uot->add_option("--rho2", uot.rho2)->check(pos)->capture_default_str();
  s_uot->add_option("--iters", uot.iters)->check(pos)->capture_default_str();
  s_uot->add_option("--p", uot.p, "Cost exponent (1 or 2)")->check(CLI::IsMember({1.0, 2.0}))->capture_default_str();
  auto* s_gw = app.add_subcommand("gw", "Sliced Gromov-Wasserstein heuristic");
  add_common(s_gw, gw.c, 50);
  for (auto [sub, cfg] : {std::pair{s_partial, &partial}, std::pair{s_uot, &uot}, std::pair{s_gw, &gw}}) {
    sub->add_option("--a", cfg->a)->required()->check(CLI::ExistingFile);
    sub->add_option("--b", cfg->b)->required()->check(CLI::ExistingFile);
  }

  MultiCfg mmot, kern, embed;
  auto* s_mmot = app.add_subcommand("mmot", "Sliced multi-marginal cost with barycentric cost");
  add_common(s_mmot, mmot.c);
  s_mmot->add_option("--betas", mmot.betas, "Comma separated marginal weights (default uniform)");
  auto* s_kernel = app.add_subcommand("kernel", "Gram matrix of SW kernels (CSV)");
  add_common(s_kernel, kern.c);
  s_kernel->add_option("--kernel", kern.kernel)->check(CLI::IsMember({"sw", "usw"}))->capture_default_str();
  s_kernel->add_option("--gamma", kern.gamma)->check(pos)->capture_default_str();
  s_kernel->add_option("--out", kern.out_path);
  auto* s_embed = app.add_subcommand("embed", "Sliced Wasserstein embedding (CSV with provenance header)");
  add_common(s_embed, embed.c);
  s_embed->add_option("--reference", embed.reference, "Reference measure CSV (uniform weights)")
      ->check(CLI::ExistingFile);
  s_embed->add_option("--ref-size", embed.ref_size, "Default reference size")->check(pos)->capture_default_str();
  s_embed->add_option("--out", embed.out_path);
  for (auto [sub, cfg] : {std::pair{s_mmot, &mmot}, std::pair{s_kernel, &kern}, std::pair{s_embed, &embed}})
    sub->add_option("--input", cfg->inputs, "Measure CSV files")->required()->check(CLI::ExistingFile);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (s_dist->parsed()) cmd_dist(dist, out);
    else if (s_plan->parsed()) cmd_plan(plan, out);
    else if (s_bary->parsed()) cmd_barycenter(bary, out);
    else if (s_flow->parsed()) cmd_flow(flow, out);
    else if (s_idt->parsed()) cmd_idt(idtc, out);
    else if (s_color->parsed()) cmd_color(color, out);
    else if (s_bench->parsed()) cmd_bench(bench, out);
    else if (s_build->parsed()) cmd_sketch_build(sk_build, out);
    else if (s_query->parsed()) cmd_sketch_query(sk_query, out);
    else if (s_partial->parsed()) cmd_partial(partial, out);
    else if (s_uot->parsed()) cmd_uot(uot, out);
    else if (s_gw->parsed()) cmd_gw(gw, out);
    else if (s_mmot->parsed()) cmd_mmot(mmot, out);
    else if (s_kernel->parsed()) cmd_kernel(kern, out);
    else if (s_embed->parsed()) cmd_embed(embed, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::Numerical ? 3 : 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error [IO]: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace slicedot::cli
