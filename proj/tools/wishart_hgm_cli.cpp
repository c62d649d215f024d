// wishart-hgm: command-line front end over the C API.

#include <wishart_hgm/wishart_hgm.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/utsname.h>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

enum Exit { kOk = 0, kValidationFailed = 1, kUsage = 2, kInvalidModel = 3, kNumerical = 4 };

struct RunError {
  int exit;
  std::string code;
  std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw RunError{kUsage, "usage", msg}; }

int exit_for(whgm_status st) {
  switch (st) {
    case WHGM_E_INVALID_ARGUMENT:
    case WHGM_E_INVALID_MODEL:
    case WHGM_E_DOMAIN:
      return kInvalidModel;
    default:
      return kNumerical;
  }
}

void check(whgm_status st) {
  if (st != WHGM_OK) throw RunError{exit_for(st), whgm_status_name(st), whgm_last_error()};
}

void print_error(const RunError& e) {
  std::string msg = e.message;
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  std::cerr << "error code=" << e.code << " exit=" << e.exit << ": " << msg << "\n";
}

std::string sci(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits, v);
  return buf;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// lo:hi:n, evenly spaced, both ends included.
std::vector<double> parse_grid(const std::string& spec, const std::string& flag) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) usage_error(flag + " expects lo:hi:n, got '" + spec + "'");
  double lo = 0, hi = 0;
  long n = 0;
  try {
    std::size_t pos = 0;
    lo = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("lo");
    hi = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("hi");
    n = std::stol(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("n");
  } catch (const std::exception&) {
    usage_error(flag + " expects lo:hi:n, got '" + spec + "'");
  }
  if (n < 1 || !std::isfinite(lo) || !std::isfinite(hi)) usage_error(flag + ": n must be >= 1 and bounds finite");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return g;
}

struct OptionsDeleter {
  void operator()(whgm_options* o) const { whgm_options_destroy(o); }
};
struct ModelDeleter {
  void operator()(whgm_model* m) const { whgm_model_destroy(m); }
};
using OptionsPtr = std::unique_ptr<whgm_options, OptionsDeleter>;
using ModelPtr = std::unique_ptr<whgm_model, ModelDeleter>;

struct Numerics {
  std::string method = "hgm";
  double eps = 1e-15;
  int max_terms = 10000;
  double quad_tol = 1e-14;
  double rk_tol = 1e-14;
  double rk_step = 0.0;
  double x0 = 0.0;
  std::string precision = "dd";
  int trials = 32;
  std::uint64_t seed = 1;
  int threads = -1;

  void add(CLI::App* app, bool with_method = true) {
    if (with_method) {
      app->add_option("--method", method, "series | quad | hgm | hgm-enhanced")
          ->check(CLI::IsMember({"series", "quad", "quadrature", "hgm", "hgm-enhanced"}));
    }
    app->add_option("--eps", eps, "series convergence threshold");
    app->add_option("--max-terms", max_terms, "series shell budget");
    app->add_option("--quad-tol", quad_tol, "quadrature relative tolerance");
    app->add_option("--rk-tol", rk_tol, "adaptive Runge-Kutta relative tolerance");
    app->add_option("--rk-step", rk_step, "fixed RK4 step in sqrt(x) (0 = adaptive)");
    app->add_option("--x0", x0, "HGM starting point (0 = default)");
    app->add_option("--precision", precision, "determinant arithmetic")->check(CLI::IsMember({"dd", "native"}));
    app->add_option("--trials", trials, "perturbation trials for abs_err (0 = off)");
    app->add_option("--seed", seed, "seed for error estimates and Monte-Carlo");
    app->add_option("--threads", threads, "worker threads (default: WISHART_HGM_THREADS or all cores)");
  }

  int resolved_threads() const {
    if (threads >= 0) return threads;
    if (const char* env = std::getenv("WISHART_HGM_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 0) usage_error("WISHART_HGM_THREADS must be a non-negative integer");
      return static_cast<int>(v);
    }
    return 0;
  }

  whgm_method parsed_method() const {
    whgm_method m{};
    if (whgm_method_parse(method.c_str(), &m) != WHGM_OK) usage_error("unknown method '" + method + "'");
    return m;
  }

  OptionsPtr make() const {
    whgm_options* raw = nullptr;
    check(whgm_options_create(&raw));
    OptionsPtr o(raw);
    check(whgm_options_set_series_eps(raw, eps));
    check(whgm_options_set_series_max_terms(raw, max_terms));
    check(whgm_options_set_quad_tol(raw, quad_tol));
    check(whgm_options_set_rk_tol(raw, rk_tol));
    check(whgm_options_set_rk_fixed_step(raw, rk_step));
    check(whgm_options_set_x0(raw, x0));
    check(whgm_options_set_double_double(raw, precision == "dd"));
    check(whgm_options_set_error_trials(raw, trials));
    check(whgm_options_set_seed(raw, seed));
    check(whgm_options_set_threads(raw, resolved_threads()));
    return o;
  }
};

struct ModelArgs {
  int nt = 0;
  int nr = 0;
  std::vector<double> lambdas;
  std::vector<double> shape;
  double k_db = NAN;

  void add(CLI::App* app) {
    app->add_option("--nt", nt, "transmit antennas")->required();
    app->add_option("--nr", nr, "receive antennas")->required();
    app->add_option("--lambdas", lambdas, "eigenvalues of (K+1) Hd^H Hd, comma separated")->delimiter(',');
    app->add_option("--shape", shape, "eigenvalue shape rescaled to trace K nt nr")->delimiter(',');
    app->add_option("--k-db", k_db, "Rician factor in dB (default with --lambdas: trace / (nt nr))");
  }

  ModelPtr make() const {
    if (lambdas.empty() == shape.empty()) usage_error("give exactly one of --lambdas and --shape");
    whgm_model* raw = nullptr;
    if (!shape.empty()) {
      if (std::isnan(k_db)) usage_error("--shape requires --k-db");
      check(whgm_model_from_shape(nt, nr, db_to_linear(k_db), shape.data(), shape.size(), &raw));
    } else {
      double K = 0.0;
      if (!std::isnan(k_db)) {
        K = db_to_linear(k_db);
      } else {
        double tr = 0.0;
        for (double l : lambdas) tr += l;
        K = tr / (static_cast<double>(nt) * nr);
      }
      check(whgm_model_create(nt, nr, K, lambdas.data(), lambdas.size(), &raw));
    }
    return ModelPtr(raw);
  }
};

json model_json(const whgm_model* m) {
  int nt = 0, nr = 0;
  double K = 0;
  std::size_t s = 0;
  check(whgm_model_info(m, &nt, &nr, &K, &s));
  std::vector<double> l(s);
  check(whgm_model_lambdas(m, l.data(), s));
  return json{{"n_t", nt}, {"n_r", nr}, {"K", K}, {"lambdas", l}};
}

struct Output {
  std::string format = "csv";
  std::string file;
  bool stable = false;
  std::string plot;

  void add(CLI::App* app, bool with_plot) {
    app->add_option("--out", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--out-file", file, "write output here instead of stdout");
    app->add_flag("--stable", stable, "report wall_ms as 0 so output is byte-stable");
    if (with_plot) app->add_option("--emit-plot", plot, "write a gnuplot script reading --out-file");
  }

  void write(const std::string& text) const {
    if (file.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(file, std::ios::binary);
    if (!f) throw RunError{kUsage, "io", "cannot open '" + file + "' for writing"};
    f << text;
  }

  void emit_plot(const std::string& xlabel, const std::string& ylabel, int xcol, int ycol, bool logy) const {
    if (plot.empty()) return;
    if (file.empty() || format != "csv") usage_error("--emit-plot requires --out csv and --out-file");
    std::ofstream f(plot, std::ios::binary);
    if (!f) throw RunError{kUsage, "io", "cannot open '" + plot + "' for writing"};
    f << "set datafile separator ','\n"
      << "set key off\n"
      << "set grid\n"
      << "set xlabel '" << xlabel << "'\n"
      << "set ylabel '" << ylabel << "'\n"
      << (logy ? "set logscale y\n" : "")
      << "plot '" << file << "' using " << xcol << ":" << ycol << " every ::1 with linespoints\n";
  }

  double ms(double v) const { return stable ? 0.0 : v; }
};

std::string flag_for(const whgm_cdf_point& p) {
  if (p.out_of_range) return "out_of_range";
  if (p.cancellation) return "cancellation";
  if (p.value < 0.0 || p.value > 1.0) return "outside_unit";
  return "ok";
}

bool any_flagged(const std::vector<whgm_cdf_point>& pts) {
  return std::any_of(pts.begin(), pts.end(), [](const whgm_cdf_point& p) { return flag_for(p) != "ok"; });
}

// --- hkn -------------------------------------------------------------------

struct HknArgs {
  int k = 0;
  int n = 1;
  double x = 0;
  double lambda = 0;
  Numerics num;
  Output out;
};

int run_hkn(const HknArgs& a) {
  const Numerics& num = a.num;
  const auto opts = num.make();
  whgm_hkn_result r{};
  const whgm_status st = whgm_hkn(a.k, a.n, a.x, a.lambda, num.parsed_method(), opts.get(), &r);
  if (st != WHGM_OK && st != WHGM_E_NOT_CONVERGED) check(st);
  const std::string method = whgm_method_name(num.parsed_method());
  const std::string breakdown = whgm_breakdown_name(r.breakdown);
  std::ostringstream o;
  if (a.out.format == "json") {
    json j{{"command", "hkn"}, {"k", a.k},           {"n", a.n},          {"x", a.x},
           {"lambda", a.lambda}, {"value", r.value}, {"log10_abs", r.log10_abs}, {"sign", r.sign},
           {"rel_err", r.rel_err}, {"method", method}, {"work", r.work},    {"converged", r.converged != 0},
           {"breakdown", breakdown}};
    o << j.dump(2) << "\n";
  } else {
    o << "k,n,x,lambda,value,log10_abs,rel_err,method,work,converged,breakdown\n";
    o << a.k << "," << a.n << "," << sci(a.x) << "," << sci(a.lambda) << "," << sci(r.value) << ","
      << sci(r.log10_abs) << "," << sci(r.rel_err, 3) << "," << method << "," << r.work << ","
      << (r.converged ? 1 : 0) << "," << breakdown << "\n";
  }
  a.out.write(o.str());
  if (st == WHGM_E_NOT_CONVERGED) throw RunError{kNumerical, whgm_status_name(st), whgm_last_error()};
  return kOk;
}

// --- cdf -------------------------------------------------------------------

struct CdfArgs {
  ModelArgs model;
  Numerics num;
  Output out;
  std::vector<double> x;
  std::string x_grid;
  std::string log10_x_grid;
};

std::vector<double> cdf_points(const CdfArgs& a) {
  const int given = (!a.x.empty()) + (!a.x_grid.empty()) + (!a.log10_x_grid.empty());
  if (given != 1) usage_error("give exactly one of --x, --x-grid, --log10-x-grid");
  if (!a.x.empty()) return a.x;
  if (!a.x_grid.empty()) return parse_grid(a.x_grid, "--x-grid");
  auto g = parse_grid(a.log10_x_grid, "--log10-x-grid");
  for (double& v : g) v = std::pow(10.0, v);
  return g;
}

std::string render_cdf(const std::vector<whgm_cdf_point>& pts, const std::string& method, const Output& out,
                       const whgm_model* model) {
  const bool flag = any_flagged(pts);
  std::ostringstream o;
  if (out.format == "json") {
    json rows = json::array();
    for (const auto& p : pts) {
      json r{{"x", p.x}, {"cdf", p.value}, {"abs_err", p.abs_err}, {"method", method}, {"wall_ms", out.ms(p.wall_ms)}};
      if (flag) r["flag"] = flag_for(p);
      rows.push_back(r);
    }
    o << json{{"command", "cdf"}, {"model", model_json(model)}, {"rows", rows}}.dump(2) << "\n";
    return o.str();
  }
  o << "x,cdf,abs_err,method,wall_ms" << (flag ? ",flag" : "") << "\n";
  for (const auto& p : pts) {
    o << sci(p.x) << "," << sci(p.value) << "," << sci(p.abs_err, 3) << "," << method << ","
      << sci(out.ms(p.wall_ms), 3);
    if (flag) o << "," << flag_for(p);
    o << "\n";
  }
  return o.str();
}

int run_cdf(const CdfArgs& a) {
  const auto xs = cdf_points(a);
  const auto model = a.model.make();
  const auto opts = a.num.make();
  const whgm_method m = a.num.parsed_method();
  std::vector<whgm_cdf_point> pts(xs.size());
  check(whgm_cdf(model.get(), m, opts.get(), xs.data(), xs.size(), pts.data()));
  a.out.write(render_cdf(pts, whgm_method_name(m), a.out, model.get()));
  a.out.emit_plot("x", "Pr(phi_max <= x)", 1, 2, false);
  return kOk;
}

// --- outage ----------------------------------------------------------------

struct OutageArgs {
  ModelArgs model;
  Numerics num;
  Output out;
  double gamma_th_db = 8.2;
  std::string gamma_b_db_grid;
  std::vector<double> gamma_b_db;
};

int run_outage(const OutageArgs& a) {
  if (a.gamma_b_db_grid.empty() == a.gamma_b_db.empty()) usage_error("give exactly one of --gamma-b-db-grid and --gamma-b-db");
  const auto gdb = a.gamma_b_db.empty() ? parse_grid(a.gamma_b_db_grid, "--gamma-b-db-grid") : a.gamma_b_db;
  const auto model = a.model.make();
  const auto opts = a.num.make();
  const whgm_method m = a.num.parsed_method();
  std::vector<double> gb(gdb.size());
  for (std::size_t i = 0; i < gdb.size(); ++i) gb[i] = db_to_linear(gdb[i]);
  std::vector<whgm_cdf_point> pts(gb.size());
  check(whgm_outage(model.get(), m, opts.get(), db_to_linear(a.gamma_th_db), gb.data(), gb.size(), pts.data()));
  const bool flag = any_flagged(pts);
  std::ostringstream o;
  if (a.out.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      json r{{"gamma_b_db", gdb[i]}, {"x", pts[i].x}, {"outage", pts[i].value}, {"abs_err", pts[i].abs_err}};
      if (flag) r["flag"] = flag_for(pts[i]);
      rows.push_back(r);
    }
    o << json{{"command", "outage"},
              {"model", model_json(model.get())},
              {"gamma_th_db", a.gamma_th_db},
              {"method", whgm_method_name(m)},
              {"rows", rows}}
             .dump(2)
      << "\n";
  } else {
    o << "gamma_b_db,x,outage,abs_err" << (flag ? ",flag" : "") << "\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      o << sci(gdb[i]) << "," << sci(pts[i].x) << "," << sci(pts[i].value) << "," << sci(pts[i].abs_err, 3);
      if (flag) o << "," << flag_for(pts[i]);
      o << "\n";
    }
  }
  a.out.write(o.str());
  a.out.emit_plot("Gamma_b (dB)", "outage probability", 1, 3, true);
  return kOk;
}

// --- validate --------------------------------------------------------------

struct ValidateArgs {
  CdfArgs cdf;
  long samples = 100000;
};

int run_validate(const ValidateArgs& a) {
  const auto xs = cdf_points(a.cdf);
  const auto model = a.cdf.model.make();
  const auto opts = a.cdf.num.make();
  const whgm_method m = a.cdf.num.parsed_method();
  std::vector<whgm_cdf_point> pts(xs.size());
  check(whgm_cdf(model.get(), m, opts.get(), xs.data(), xs.size(), pts.data()));
  std::vector<whgm_mc_estimate> mc(xs.size());
  check(whgm_mc_cdf(model.get(), xs.data(), xs.size(), a.samples, a.cdf.num.seed, a.cdf.num.resolved_threads(),
                    mc.data()));
  bool ok = true;
  std::vector<double> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double se = std::max(mc[i].std_err, 1.0 / static_cast<double>(mc[i].n_samples));
    z[i] = (pts[i].value - mc[i].p_hat) / se;
    if (!(std::fabs(z[i]) <= 3.0)) ok = false;
  }
  std::ostringstream o;
  const std::string method = whgm_method_name(m);
  if (a.cdf.out.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rows.push_back(json{{"x", xs[i]},
                          {"analytic", pts[i].value},
                          {"abs_err", pts[i].abs_err},
                          {"mc", mc[i].p_hat},
                          {"std_err", mc[i].std_err},
                          {"z", z[i]}});
    }
    o << json{{"command", "validate"},
              {"model", model_json(model.get())},
              {"method", method},
              {"samples", a.samples},
              {"seed", a.cdf.num.seed},
              {"rng", whgm_rng_description()},
              {"pass", ok},
              {"rows", rows}}
             .dump(2)
      << "\n";
  } else {
    o << "x,analytic,abs_err,mc,std_err,z\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      o << sci(xs[i]) << "," << sci(pts[i].value) << "," << sci(pts[i].abs_err, 3) << "," << sci(mc[i].p_hat) << ","
        << sci(mc[i].std_err, 3) << "," << sci(z[i], 3) << "\n";
    }
  }
  a.cdf.out.write(o.str());
  if (!ok) throw RunError{kValidationFailed, "validation_failed", "analytic CDF outside 3 standard errors of Monte-Carlo"};
  return kOk;
}

// --- bench -----------------------------------------------------------------

struct BenchCase {
  std::string name;
  int nt, nr;
  std::vector<double> lambdas;
  std::vector<double> xs;
};

std::vector<BenchCase> suite_cases(const std::string& suite, int points) {
  std::vector<BenchCase> cs;
  auto linspace = [points](double lo, double hi) {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    return v;
  };
  if (suite == "small") {
    for (int nr = 5; nr <= 9; ++nr)
      cs.push_back({"5x" + std::to_string(nr), 5, nr, {0.1, 0.2, 0.3, 0.4, 0.5}, linspace(0.5, 50.0)});
  } else if (suite == "moderate") {
    std::vector<double> xs;
    for (int i = 0; i <= 10; ++i) xs.push_back(std::pow(10.0, 1.0 + 0.1 * i));
    cs.push_back({"10x10", 10, 10, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, xs});
  } else {
    cs.push_back({"5x5", 5, 5, {0.4e5, 0.8e5, 1.2e5, 1.6e5, 2.0e5}, linspace(1.985e5, 2.015e5)});
  }
  return cs;
}

struct BenchArgs {
  std::string suite = "small";
  std::vector<std::string> methods;
  int points = 100;
  Numerics num;
  Output out;
};

json machine_json() {
  json j{{"hardware_threads", std::thread::hardware_concurrency()}, {"library_version", whgm_version()}};
  utsname u{};
  if (uname(&u) == 0) {
    j["system"] = u.sysname;
    j["release"] = u.release;
    j["arch"] = u.machine;
  }
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  return j;
}

int run_bench(BenchArgs a) {
  if (a.points < 2) usage_error("--points must be >= 2");
  if (a.methods.empty()) a.methods = a.suite == "large" ? std::vector<std::string>{"quad", "hgm-enhanced"}
                                                      : std::vector<std::string>{"quad", "hgm"};
  std::vector<whgm_method> ms;
  for (const auto& s : a.methods) {
    whgm_method m{};
    if (whgm_method_parse(s.c_str(), &m) != WHGM_OK) usage_error("unknown method '" + s + "'");
    ms.push_back(m);
  }
  const auto opts = a.num.make();
  json rows = json::array();
  std::ostringstream csv;
  csv << "suite,case,method,points,wall_ms,max_abs_dev,status\n";
  for (const auto& c : suite_cases(a.suite, a.points)) {
    whgm_model* raw = nullptr;
    double tr = 0.0;
    for (double l : c.lambdas) tr += l;
    check(whgm_model_create(c.nt, c.nr, tr / (c.nt * c.nr), c.lambdas.data(), c.lambdas.size(), &raw));
    ModelPtr model(raw);
    std::vector<whgm_cdf_point> ref(c.xs.size());
    const whgm_status rs =
        whgm_cdf(model.get(), WHGM_METHOD_QUADRATURE, opts.get(), c.xs.data(), c.xs.size(), ref.data());
    for (whgm_method m : ms) {
      std::vector<whgm_cdf_point> pts(c.xs.size());
      const auto t0 = std::chrono::steady_clock::now();
      const whgm_status st = whgm_cdf(model.get(), m, opts.get(), c.xs.data(), c.xs.size(), pts.data());
      const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      double dev = NAN;
      if (st == WHGM_OK && rs == WHGM_OK) {
        dev = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) dev = std::max(dev, std::fabs(pts[i].value - ref[i].value));
      }
      const std::string status = whgm_status_name(st);
      rows.push_back(json{{"suite", a.suite},
                          {"case", c.name},
                          {"method", whgm_method_name(m)},
                          {"points", c.xs.size()},
                          {"wall_ms", a.out.ms(wall)},
                          {"max_abs_dev", dev},
                          {"status", status}});
      csv << a.suite << "," << c.name << "," << whgm_method_name(m) << "," << c.xs.size() << ","
          << sci(a.out.ms(wall), 3) << "," << sci(dev, 3) << "," << status << "\n";
    }
  }
  if (a.out.format == "json") {
    json meta = machine_json();
    if (a.out.stable) meta = json{{"library_version", whgm_version()}};
    a.out.write(json{{"command", "bench"}, {"suite", a.suite}, {"reference", "quad"}, {"machine", meta}, {"rows", rows}}
                    .dump(2) +
                "\n");
  } else {
    a.out.write(csv.str());
  }
  return kOk;
}

// --- config file -----------------------------------------------------------

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value lines; keys are flag names without the leading dashes.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) usage_error("cannot read config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) usage_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    kv.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Appends config entries not already given as flags, so flags override the file.
std::vector<std::string> merge_config(std::vector<std::string> args, CLI::App& app) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  CLI::App* sub = nullptr;
  for (std::size_t i = 1; i < args.size() && !sub; ++i) {
    if (!args[i].empty() && args[i][0] != '-') {
      try {
        sub = app.get_subcommand(args[i]);
      } catch (const CLI::OptionNotFound&) {
      }
    }
  }
  if (!sub) return args;
  for (const auto& [key, value] : read_config(path)) {
    if (key == "config" || given_on_command_line(args, key)) continue;
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) usage_error("config key '" + key + "' is not an option of '" + sub->get_name() + "'");
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value.empty()) args.push_back("--" + key);
    } else {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Largest-eigenvalue CDF of complex noncentral Wishart matrices (MIMO MRC outage)", "wishart-hgm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(whgm_version()));

  std::string config_path;
  auto add_config = [&](CLI::App* s) { s->add_option("--config", config_path, "flat key=value file of flag defaults"); };

  HknArgs hkn;
  hkn.num.method.clear();
  hkn.num.eps = 1e-10;
  auto* c_hkn = app.add_subcommand("hkn", "evaluate H^k_n(x, lambda)");
  c_hkn->add_option("--k", hkn.k, "power k >= 0")->required();
  c_hkn->add_option("--n", hkn.n, "0F1 parameter n >= 1")->required();
  c_hkn->add_option("--x", hkn.x, "upper limit x >= 0")->required();
  c_hkn->add_option("--lambda", hkn.lambda, "lambda >= 0")->required();
  hkn.num.add(c_hkn);
  c_hkn->get_option("--method")->required();
  hkn.out.add(c_hkn, false);
  add_config(c_hkn);

  CdfArgs cdf;
  auto add_cdf = [](CLI::App* s, CdfArgs& a) {
    a.model.add(s);
    a.num.add(s);
    s->add_option("--x", a.x, "evaluation points, comma separated")->delimiter(',');
    s->add_option("--x-grid", a.x_grid, "lo:hi:n linear grid");
    s->add_option("--log10-x-grid", a.log10_x_grid, "lo:hi:n grid in log10 x");
  };
  auto* c_cdf = app.add_subcommand("cdf", "CDF of the largest eigenvalue");
  add_cdf(c_cdf, cdf);
  cdf.out.add(c_cdf, true);
  add_config(c_cdf);

  OutageArgs outage;
  auto* c_out = app.add_subcommand("outage", "MRC outage probability over a Gamma_b sweep");
  outage.model.add(c_out);
  outage.num.add(c_out);
  c_out->add_option("--gamma-th-db", outage.gamma_th_db, "detection threshold in dB")->capture_default_str();
  c_out->add_option("--gamma-b-db-grid", outage.gamma_b_db_grid, "lo:hi:n average SNR sweep in dB");
  c_out->add_option("--gamma-b-db", outage.gamma_b_db, "average SNR values in dB")->delimiter(',');
  outage.out.add(c_out, true);
  add_config(c_out);

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "compare the analytic CDF with Monte-Carlo");
  add_cdf(c_val, val.cdf);
  c_val->add_option("--samples", val.samples, "Monte-Carlo samples")->capture_default_str();
  val.cdf.out.add(c_val, false);
  add_config(c_val);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "wall time and accuracy per method on a fixed suite");
  c_bench->add_option("--suite", bench.suite, "small | moderate | large")
      ->check(CLI::IsMember({"small", "moderate", "large"}));
  c_bench->add_option("--methods", bench.methods, "methods, comma separated")->delimiter(',');
  c_bench->add_option("--points", bench.points, "grid points per linear-grid case")->capture_default_str();
  bench.num.add(c_bench, false);
  bench.out.add(c_bench, false);
  add_config(c_bench);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(args, app);
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::Success& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      print_error(RunError{kUsage, "usage", e.what()});
      return kUsage;
    }
    if (c_hkn->parsed()) return run_hkn(hkn);
    if (c_cdf->parsed()) return run_cdf(cdf);
    if (c_out->parsed()) return run_outage(outage);
    if (c_val->parsed()) return run_validate(val);
    if (c_bench->parsed()) return run_bench(bench);
    return kUsage;
  } catch (const RunError& e) {
    print_error(e);
    return e.exit;
  } catch (const std::exception& e) {
    print_error(RunError{kNumerical, "internal", e.what()});
    return kNumerical;
  }
}
