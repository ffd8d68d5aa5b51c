#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <regex>
#include <thread>

#include <CLI11.hpp>

#include "cflab/gates.hpp"
#include "cflab/protocols.hpp"
#include "cflab/rng.hpp"

namespace cflab::cli {

using nlohmann::json;
namespace P = cflab::protocols;

const std::vector<std::string>& protocols() {
  static const std::vector<std::string> p{"clf", "threebox", "ghz", "pm", "lg", "lf", "certify", "zeno"};
  return p;
}

namespace {

[[noreturn]] void invariant_breach(const std::string& what) {
  throw Error(ErrorKind::NumericalValidation, what);
}

// Accepts plain numbers and the forms pi, a*pi, pi/b, a*pi/b.
double get_angle(const Config& cfg, const std::string& section, const std::string& key, double fallback) {
  const auto e = cfg.entry(section, key);
  if (!e) return fallback;
  static const std::regex form(R"(^\s*(?:([0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$)");
  std::smatch m;
  if (std::regex_match(e->value, m, form)) {
    const double a = m[1].matched ? std::stod(m[1].str()) : 1.0;
    const double b = m[2].matched ? std::stod(m[2].str()) : 1.0;
    if (b == 0.0) cfg.fail(section, key, "division by zero");
    return a * M_PI / b;
  }
  return cfg.get_double(section, key, fallback);
}

std::uint64_t seed_of(const Config& cfg) { return cfg.get_u64("run", "seed", 0); }

ifm::OracleSpec oracle_spec(const Config& cfg) {
  ifm::OracleSpec spec;
  const auto kind = cfg.get_string("oracle", "kind", "ideal_fig1");
  if (kind == "ideal_fig1") {
    spec.kind = ifm::OracleKind::IdealFig1;
  } else if (kind == "weak_zeno") {
    spec.kind = ifm::OracleKind::WeakZeno;
  } else {
    cfg.fail("oracle", "kind", "expected ideal_fig1 or weak_zeno, got '" + kind + "'");
  }
  spec.cycles = cfg.get_int("oracle", "cycles", 1);
  if (cfg.has("oracle", "theta")) spec.theta = get_angle(cfg, "oracle", "theta", 0.0);
  spec.absorption = cfg.get_double("oracle", "absorption", spec.absorption);
  try {
    spec.validate();
  } catch (const Error& err) {
    cfg.fail("oracle", cfg.has("oracle", "theta") ? "theta" : "cycles", err.what());
  }
  return spec;
}

P::CLFConfig clf_config(const Config& cfg) {
  P::CLFConfig c;
  const auto wiring = cfg.get_string("clf", "wiring", "direct");
  if (wiring == "direct") {
    c.wiring = P::Wiring::Direct;
  } else if (wiring == "routed") {
    c.wiring = P::Wiring::Routed;
  } else {
    cfg.fail("clf", "wiring", "expected direct or routed, got '" + wiring + "'");
  }
  c.postselect_routing = cfg.get_bool("clf", "postselect_routing", false);
  for (const auto& [key, target] : {std::pair{"encoding_a", &c.encoding_a}, std::pair{"encoding_b", &c.encoding_b}}) {
    const auto v = cfg.get_ints("clf", key, {(*target)[0], (*target)[1]});
    if (v.size() != 2 || (v[0] != 0 && v[0] != 1) || (v[1] != 0 && v[1] != 1)) {
      cfg.fail("clf", key, "expected [C for b=0, C for b=1] with entries in {0, 1}");
    }
    *target = {v[0], v[1]};
  }
  return c;
}

json certificate_json(const eps::EpsilonCertificate& c) { return to_json(c); }

json edge_json(const P::InferenceEdge& e) {
  json j{{"from", e.from}, {"to", e.to}, {"kind", e.kind == P::EdgeKind::Causal ? "causal" : "modal"}};
  if (e.kind == P::EdgeKind::Modal) {
    j["chain"] = e.chain;
    j["premise_value"] = e.premise_value;
    j["conclusion_value"] = e.conclusion_value;
    j["evaluated"] = e.evaluated;
    j["confidence"] = e.confidence;
    j["status"] = !e.evaluated ? "undefined" : (e.sound ? "verified" : "violated");
  }
  return j;
}

json run_clf(const Config& cfg) {
  const auto c = clf_config(cfg);
  const auto rep = P::clf_run(c);
  if (rep.p_dark_dark < -1e-12 || rep.p_dark_dark > 1.0 + 1e-12) invariant_breach("p_dark_dark outside [0, 1]");
  json edges = json::array();
  for (const auto& e : rep.graph.edges) edges.push_back(edge_json(e));
  json chains = json::array();
  for (const auto& ch : rep.chains) chains.push_back({{"name", ch.name}, {"claimed_coin", ch.claimed_coin}, {"sound", ch.sound}});
  json support = json::array();
  for (const auto& [row, p] : rep.joint) {
    if (p > ontic::kSupportThreshold) support.push_back({{"values", row}, {"probability", p}});
  }
  json out{
      {"wiring", P::to_string(c.wiring)},
      {"postselect_routing", c.postselect_routing},
      {"encoding_a", c.encoding_a},
      {"encoding_b", c.encoding_b},
      {"p_dark_dark", rep.p_dark_dark},
      {"graph", {{"nodes", rep.graph.nodes}, {"edges", edges}}},
      {"chains", chains},
      {"contradiction_detected", rep.contradiction_detected},
      {"modal_contradiction", rep.modal_contradiction},
      {"joint_variables", rep.joint_variables},
      {"support", support},
      {"support_threshold", ontic::kSupportThreshold},
  };
  if (rep.modal_contradiction != rep.contradiction_detected) {
    invariant_breach("modal checker disagrees with the probabilistic chain evaluation");
  }
  if (cfg.has("clf", "robustness_epsilons")) {
    const auto eps_list = cfg.get_doubles("clf", "robustness_epsilons", {});
    for (double e : eps_list) {
      if (e < 0.0) cfg.fail("clf", "robustness_epsilons", "epsilon values must be nonnegative");
    }
    const auto rob = P::clf_robustness(c, eps_list);
    json points = json::array();
    for (const auto& p : rob.points) {
      json conf = json::object();
      for (const auto& [name, v] : p.edge_confidence) conf[name] = v;
      points.push_back({{"epsilon", p.epsilon},
                        {"certified_epsilon", p.certified_epsilon},
                        {"min_confidence", p.min_confidence},
                        {"edge_confidence", conf}});
    }
    out["robustness"] = {
        {"points", points},
        {"fitted_exponent", rob.fitted_exponent ? json(*rob.fitted_exponent) : json(nullptr)},
        {"fitted_c", rob.fitted_c},
        {"bound_holds", rob.bound_holds},
        {"monotone", rob.monotone},
        {"family", "dark_branch_bit_flip"},
    };
  }
  return out;
}

json run_threebox(const Config& cfg) {
  const double k_prime = cfg.get_double("constants", "k_prime", 1.0);
  if (k_prime < 0.0) cfg.fail("constants", "k_prime", "must be nonnegative");
  const auto epsilons = cfg.get_doubles("threebox", "epsilons", {0.0, 0.01, 0.1});
  const auto probe = oracle_spec(cfg);

  const double abl_a = P::threebox_abl(P::BoxContext::A);
  const double abl_b = P::threebox_abl(P::BoxContext::B);
  const auto ifm_a = P::threebox_ifm(probe, P::BoxContext::A);
  const auto ifm_b = P::threebox_ifm(probe, P::BoxContext::B);
  for (double p : {abl_a, abl_b, ifm_a.p_decisive, ifm_b.p_decisive}) {
    if (p < -1e-12 || p > 1.0 + 1e-12) invariant_breach("three-box probability outside [0, 1]");
  }
  if (probe.kind == ifm::OracleKind::IdealFig1 &&
      (std::abs(ifm_a.p_decisive - abl_a) > 1e-9 || std::abs(ifm_b.p_decisive - abl_b) > 1e-9)) {
    invariant_breach("ideal probe does not reproduce the ABL values");
  }
  const double sum = ifm_a.p_decisive + ifm_b.p_decisive;
  json rows = json::array();
  for (double e : epsilons) {
    if (e < 0.0) cfg.fail("threebox", "epsilons", "epsilon values must be nonnegative");
    const auto cl = P::threebox_classical_max(k_prime, e);
    rows.push_back({{"epsilon", e},
                    {"classical_max", cl.value},
                    {"classical_max_unhalved_tv", cl.value_unhalved_tv},
                    {"quantum_sum", sum},
                    {"gap", sum - cl.value},
                    {"violated", sum > cl.value + 1e-12},
                    {"mu_a", cl.optimum.mu_a},
                    {"mu_b", cl.optimum.mu_b}});
  }
  return {
      {"abl", {{"P_A", abl_a}, {"P_B", abl_b}}},
      {"ifm",
       {{"probe", ifm::to_string(probe.kind)},
        {"P_A", ifm_a.p_decisive},
        {"P_B", ifm_b.p_decisive},
        {"p_postselect_A", ifm_a.p_postselect},
        {"p_postselect_B", ifm_b.p_postselect},
        {"certificate", certificate_json(ifm_a.certificate)}}},
      {"K", k_prime},
      {"k_prime", k_prime},
      {"tv_convention", "half_l1"},
      {"bounds", rows},
  };
}

json parity_json(const ontic::EnumerationResult& e) {
  return {{"observables", e.observables},
          {"examined", e.examined},
          {"satisfying", e.satisfying.size()},
          {"verdict", e.contradiction() ? "contradiction" : "consistent"}};
}

json run_ghz(const Config&) {
  const auto rep = P::ghz_run();
  for (double p : rep.parities) {
    if (std::abs(std::abs(p) - 1.0) > 1e-9) invariant_breach("GHZ parity is not deterministic");
  }
  return {{"settings", rep.settings},
          {"parities", rep.parities},
          {"avn", parity_json(rep.enumeration)},
          {"lab_epsilon", rep.max_lab_epsilon}};
}

json run_pm(const Config& cfg) {
  const auto mode = cfg.get_string("pm", "state", "random");
  const int samples = cfg.get_int("pm", "samples", 100);
  std::vector<qcore::QuantumState> inputs;
  const qcore::Layout layout{{"q1", 2}, {"q2", 2}};
  if (mode == "random") {
    if (samples < 1) cfg.fail("pm", "samples", "must be >= 1");
    for (int i = 0; i < samples; ++i) {
      rng::Stream s(seed_of(cfg), "pm_states", static_cast<std::uint64_t>(i));
      inputs.push_back(rng::haar_state(layout, s));
    }
  } else if (mode == "maximally_mixed") {
    inputs.push_back(qcore::QuantumState::mixed(layout, qcore::Matrix::Identity(4, 4) / 4.0));
  } else {
    json lit;
    try {
      lit = json::parse(mode);
    } catch (const json::parse_error&) {
      cfg.fail("pm", "state", "expected random, maximally_mixed or an amplitude list");
    }
    qcore::Vector v(4);
    try {
      const auto m = parse_matrix(json::array({lit}));
      if (m.rows() != 1 || m.cols() != 4) cfg.fail("pm", "state", "amplitude list must have 4 entries");
      v = m.row(0).transpose();
      inputs.push_back(qcore::QuantumState::pure(layout, v));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      cfg.fail("pm", "state", e.what());
    }
  }
  json products = json::array();
  double worst = 0.0;
  P::PMReport first;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto rep = P::pm_run(inputs[i]);
    worst = std::max(worst, std::abs(rep.product + 1.0));
    products.push_back(rep.product);
    if (i == 0) first = std::move(rep);
  }
  if (worst > 1e-9) invariant_breach("Peres-Mermin six-parity product deviates from -1");
  return {{"state", mode},
          {"inputs", inputs.size()},
          {"contexts", first.contexts},
          {"parities", first.parities},
          {"products", products},
          {"max_product_deviation", worst},
          {"avn", parity_json(first.enumeration)}};
}

json run_lg(const Config& cfg) {
  const double theta = get_angle(cfg, "lg", "theta", M_PI / 3.0);
  if (!(theta >= 0.0 && theta <= M_PI)) cfg.fail("lg", "theta", "must lie in [0, pi]");
  const double c = cfg.get_double("constants", "c", 2.0);
  const auto probe = oracle_spec(cfg);
  const auto rep = P::lg_run(theta, probe, c);
  const double closed = 2.0 * std::cos(theta) - std::cos(2.0 * theta);
  if (probe.kind == ifm::OracleKind::IdealFig1 && std::abs(rep.k3 - closed) > 1e-9) {
    invariant_breach("ideal-probe K3 departs from its closed form");
  }
  const auto mr = ontic::macrorealist_max(ontic::leggett_garg_k3(), 3, rep.epsilon, c);
  return {{"theta", theta},
          {"probe", ifm::to_string(probe.kind)},
          {"C12", rep.c12},
          {"C23", rep.c23},
          {"C13", rep.c13},
          {"K3", rep.k3},
          {"K3_closed_form", closed},
          {"epsilon", rep.epsilon},
          {"c", c},
          {"macrorealist_deterministic_max", mr.deterministic_max},
          {"macrorealist_bound", rep.macrorealist_bound},
          {"violated", rep.violated}};
}

P::CorrelatorTable table_from(const Config& cfg, const std::string& key) {
  const auto j = cfg.get_json("lf", key);
  if (!j.is_array()) cfg.fail("lf", key, "expected a list of [x, y, value] triples");
  P::CorrelatorTable t;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() || !row[1].is_number_integer() ||
        !row[2].is_number()) {
      cfg.fail("lf", key, "expected a list of [x, y, value] triples");
    }
    if (!t.emplace(std::pair{row[0].get<int>(), row[1].get<int>()}, row[2].get<double>()).second) {
      cfg.fail("lf", key, "duplicate setting pair");
    }
  }
  return t;
}

std::vector<qcore::Matrix> observables_from(const Config& cfg, const std::string& key) {
  const auto j = cfg.get_json("lf", key);
  if (!j.is_array() || j.empty()) cfg.fail("lf", key, "expected a list of 2x2 matrix literals");
  std::vector<qcore::Matrix> out;
  for (const auto& lit : j) {
    try {
      out.push_back(parse_matrix(lit));
    } catch (const Error& e) {
      cfg.fail("lf", key, e.what());
    }
    if (out.back().rows() != 2 || out.back().cols() != 2) cfg.fail("lf", key, "observables must be 2x2");
  }
  return out;
}

json run_lf(const Config& cfg) {
  const auto chsh = P::chsh_instance();
  const auto coeffs = cfg.has("lf", "coeffs") ? table_from(cfg, "coeffs") : chsh.coeffs;
  P::CorrelatorTable correlators;
  std::string source;
  if (cfg.has("lf", "correlators")) {
    correlators = table_from(cfg, "correlators");
    source = "configured";
  } else if (cfg.has("lf", "state") && cfg.get_string("lf", "state", "") != "singlet") {
    const auto lit = cfg.get_json("lf", "state");
    qcore::Matrix m;
    try {
      m = parse_matrix(json::array({lit}));
    } catch (const Error& e) {
      cfg.fail("lf", "state", e.what());
    }
    if (m.rows() != 1 || m.cols() != 4) cfg.fail("lf", "state", "two-qubit amplitude list must have 4 entries");
    const qcore::Vector v = m.row(0).transpose();
    try {
      const auto state = qcore::QuantumState::pure({{"A", 2}, {"B", 2}}, v);
      correlators = P::lf_correlators(state, observables_from(cfg, "alice"), observables_from(cfg, "bob"));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      cfg.fail("lf", "state", e.what());
    }
    source = "state";
  } else {
    correlators = chsh.correlators;
    source = "singlet_chsh";
  }
  P::LFParams params;
  params.b_lf = cfg.get_double("constants", "b_lf", params.b_lf);
  params.k1 = cfg.get_double("constants", "k1", params.k1);
  params.k2 = cfg.get_double("constants", "k2", params.k2);
  params.epsilon = cfg.get_double("lf", "epsilon", 0.0);
  params.delta = cfg.get_double("lf", "delta", 0.0);
  const auto rep = P::lf_evaluate(coeffs, correlators, params);
  json corr = json::array();
  for (const auto& [k, v] : correlators) corr.push_back({k.first, k.second, v});
  json co = json::array();
  for (const auto& [k, v] : coeffs) co.push_back({k.first, k.second, v});
  return {{"correlator_source", source},
          {"coeffs", co},
          {"correlators", corr},
          {"S_LF", rep.s_lf},
          {"B_LF", params.b_lf},
          {"K1", params.k1},
          {"K2", params.k2},
          {"epsilon", params.epsilon},
          {"delta", params.delta},
          {"relaxed_bound", rep.relaxed_bound},
          {"violated", rep.violated}};
}

json run_certify(const Config& cfg) {
  const auto target = cfg.get_string("certify", "target", "oracle");
  const auto mode_s = cfg.get_string("certify", "mode", "conditional");
  eps::Mode mode = eps::Mode::Conditional;
  if (mode_s == "raw") {
    mode = eps::Mode::Raw;
  } else if (mode_s != "conditional") {
    cfg.fail("certify", "mode", "expected conditional or raw");
  }
  json out{{"target", target}};
  if (target == "oracle") {
    const auto spec = oracle_spec(cfg);
    ifm::VerifyOptions opts;
    opts.mode = mode;
    opts.seed = seed_of(cfg);
    if (spec.kind == ifm::OracleKind::IdealFig1 && cfg.has("certify", "system_samples")) {
      const int n = cfg.get_int("certify", "system_samples", 256);
      if (n < 1) cfg.fail("certify", "system_samples", "must be >= 1");
      opts.system_states = eps::HaarSampler{{{spec.mediator_label, 2}, {spec.flag_label, 2}},
                                            static_cast<std::size_t>(n), opts.seed, "system_states"};
    }
    const auto cert = ifm::verify_counterfactuality(spec, std::nullopt, opts);
    out["oracle"] = ifm::to_string(spec.kind);
    out["certificate"] = certificate_json(cert);
  } else if (target == "channel") {
    std::vector<qcore::Matrix> kraus;
    if (cfg.has("certify", "dephasing")) {
      const double l = cfg.get_double("certify", "dephasing", 1.0);
      if (!(l >= -1.0 && l <= 1.0)) cfg.fail("certify", "dephasing", "coherence parameter must lie in [-1, 1]");
      kraus = {std::sqrt((1.0 + l) / 2.0) * gates::identity(2), std::sqrt((1.0 - l) / 2.0) * gates::pauli_z()};
      out["dephasing"] = l;
    } else if (cfg.has("certify", "kraus")) {
      const auto j = cfg.get_json("certify", "kraus");
      if (!j.is_array() || j.empty()) cfg.fail("certify", "kraus", "expected a list of matrix literals");
      for (const auto& lit : j) {
        try {
          kraus.push_back(parse_matrix(lit));
        } catch (const Error& e) {
          cfg.fail("certify", "kraus", e.what());
        }
      }
    } else {
      cfg.fail("certify", "kraus", "channel target needs kraus or dephasing");
    }
    std::optional<qcore::Channel> ch;
    try {
      ch.emplace(kraus);
    } catch (const Error& e) {
      cfg.fail("certify", cfg.has("certify", "kraus") ? "kraus" : "dephasing", e.what());
    }
    eps::DiamondOptions opts;
    opts.seed = seed_of(cfg);
    opts.random_starts = static_cast<std::size_t>(std::max(0, cfg.get_int("certify", "random_starts", 64)));
    const auto d = eps::estimate_diamond_epsilon(*ch, opts);
    if (d.lower.value > d.upper.value + 1e-9) invariant_breach("diamond lower estimate exceeds its Choi upper bound");
    out["diamond_lower"] = certificate_json(d.lower);
    out["diamond_upper"] = certificate_json(d.upper);
    out["choi_trace_norm"] = d.choi_trace_norm;
  } else {
    cfg.fail("certify", "target", "expected oracle or channel");
  }
  if (cfg.has("certify", "v_dec") || cfg.has("certify", "v_0")) {
    try {
      const auto v = eps::visibility_to_epsilon(cfg.get_double("certify", "v_dec", 1.0),
                                                cfg.get_double("certify", "v_0", 1.0));
      out["visibility"] = {{"lambda_estimate", v.lambda_estimate},
                           {"epsilon_proxy", v.epsilon_proxy},
                           {"method", eps::to_string(eps::Method::VisibilityProxy)},
                           {"rigorous", v.rigorous}};
    } catch (const Error& e) {
      cfg.fail("certify", "v_dec", e.what());
    }
  }
  if (cfg.has("certify", "compose")) {
    try {
      const auto b = eps::compose_epsilons(cfg.get_doubles("certify", "compose", {}));
      out["budget"] = {{"per_round", b.per_round}, {"total", b.total}};
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      cfg.fail("certify", "compose", e.what());
    }
  }
  return out;
}

struct ZenoRun {
  std::vector<eps::ZenoPoint> points;
  std::optional<double> success_slope;
  std::optional<double> dose_slope;
  bool monotone = true;
};

ZenoRun zeno_compute(const std::vector<int>& ns, double loss, double absorption) {
  ZenoRun r;
  r.points = eps::zeno_sweep(ns, loss, absorption);
  std::vector<double> x, fail, dose;
  for (const auto& p : r.points) {
    if (1.0 - p.success > 0.0 && p.dose > 0.0) {
      x.push_back(p.n);
      fail.push_back(1.0 - p.success);
      dose.push_back(p.dose);
    }
  }
  if (x.size() >= 2) {
    r.success_slope = eps::loglog_slope(x, fail);
    r.dose_slope = eps::loglog_slope(x, dose);
  }
  std::vector<eps::ZenoPoint> sorted = r.points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.n < b.n; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].success < sorted[i - 1].success - 1e-12) r.monotone = false;
  }
  return r;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json run_zeno(const Config& cfg) {
  const auto ns = cfg.get_ints("zeno", "n_values", {8, 16, 32, 64, 128});
  if (ns.empty()) cfg.fail("zeno", "n_values", "grid is empty");
  for (int n : ns) {
    if (n < 1) cfg.fail("zeno", "n_values", "cycle counts must be >= 1");
  }
  const double loss = cfg.get_double("zeno", "loss", 0.0);
  if (!(loss >= 0.0 && loss < 1.0)) cfg.fail("zeno", "loss", "must lie in [0, 1)");
  const double absorption = cfg.get_double("zeno", "absorption", eps::ZenoModel{}.absorption);
  if (!(absorption > 0.0 && absorption <= 1.0)) cfg.fail("zeno", "absorption", "must lie in (0, 1]");
  const auto r = zeno_compute(ns, loss, absorption);
  if (loss == 0.0 && !r.monotone) invariant_breach("lossless Zeno success is not monotone in N");
  json rows = json::array();
  for (const auto& p : r.points) {
    rows.push_back({{"N", p.n}, {"theta", p.theta}, {"success", p.success}, {"dose", p.dose},
                    {"dark", p.dark}, {"bright", p.bright}, {"lost", p.lost}});
  }
  return {{"loss", loss},
          {"absorption", absorption},
          {"points", rows},
          {"slope_failure_vs_N", opt_json(r.success_slope)},
          {"slope_dose_vs_N", opt_json(r.dose_slope)},
          {"success_monotone", r.monotone}};
}

std::vector<double> sweep_grid(const Config& cfg) {
  if (cfg.has("sweep", "values")) {
    const auto v = cfg.get_doubles("sweep", "values", {});
    if (v.empty()) cfg.fail("sweep", "values", "grid is empty");
    return v;
  }
  if (!cfg.has("sweep", "points")) cfg.fail("sweep", "values", "sweep needs values or start/points");
  const int n = cfg.get_int("sweep", "points", 0);
  if (n < 1) cfg.fail("sweep", "points", "grid is empty");
  const double start = get_angle(cfg, "sweep", "start", 0.0);
  double step = 0.0;
  if (cfg.has("sweep", "step")) {
    step = get_angle(cfg, "sweep", "step", 0.0);
  } else if (cfg.has("sweep", "stop")) {
    const double stop = get_angle(cfg, "sweep", "stop", start);
    step = n > 1 ? (stop - start) / (n - 1) : 0.0;
  } else if (n > 1) {
    cfg.fail("sweep", "points", "multi-point grid needs stop or step");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = start + i * step;
  return g;
}

template <typename Fn>
std::vector<std::vector<double>> parallel_rows(std::size_t n, unsigned threads, Fn fn) {
  std::vector<std::vector<double>> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        rows[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < k; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // Rethrow the first failure by grid index so errors are deterministic.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace

unsigned thread_budget() {
  const char* env = std::getenv("CFLAB_THREADS");
  unsigned n = 0;
  if (env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 0) n = static_cast<unsigned>(v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

json run_protocol(const std::string& protocol, const Config& cfg) {
  if (protocol == "clf") return run_clf(cfg);
  if (protocol == "threebox") return run_threebox(cfg);
  if (protocol == "ghz") return run_ghz(cfg);
  if (protocol == "pm") return run_pm(cfg);
  if (protocol == "lg") return run_lg(cfg);
  if (protocol == "lf") return run_lf(cfg);
  if (protocol == "certify") return run_certify(cfg);
  if (protocol == "zeno") return run_zeno(cfg);
  throw Error(ErrorKind::ConfigError, "unknown protocol '" + protocol + "'");
}

SweepOutput run_sweep(const Config& cfg, unsigned threads) {
  const auto protocol = cfg.get_string("sweep", "protocol", "");
  const auto grid = sweep_grid(cfg);
  SweepOutput out;
  json summary{{"schema", kSweepSchema},
               {"toolkit", "cflab"},
               {"version", kToolkitVersion},
               {"protocol", protocol},
               {"points", grid.size()},
               {"config", cfg.echo()}};

  if (protocol == "zeno") {
    std::vector<int> ns;
    for (double v : grid) {
      if (v < 1.0 || v != std::floor(v)) cfg.fail("sweep", "values", "zeno grid needs integer N >= 1");
      ns.push_back(static_cast<int>(v));
    }
    const double loss = cfg.get_double("zeno", "loss", 0.0);
    if (!(loss >= 0.0 && loss < 1.0)) cfg.fail("zeno", "loss", "must lie in [0, 1)");
    const double absorption = cfg.get_double("zeno", "absorption", eps::ZenoModel{}.absorption);
    const auto r = zeno_compute(ns, loss, absorption);
    out.table.header = {"N", "theta", "success", "dose"};
    for (const auto& p : r.points) out.table.rows.push_back({double(p.n), p.theta, p.success, p.dose});
    summary["parameter"] = "N";
    summary["slope_failure_vs_N"] = opt_json(r.success_slope);
    summary["slope_dose_vs_N"] = opt_json(r.dose_slope);
    summary["success_monotone"] = r.monotone;
  } else if (protocol == "lg") {
    const auto probe = oracle_spec(cfg);
    const double c = cfg.get_double("constants", "c", 2.0);
    for (double t : grid) {
      if (!(t >= 0.0 && t <= M_PI + 1e-12)) cfg.fail("sweep", "values", "theta must lie in [0, pi]");
    }
    out.table.header = {"theta", "C12", "C23", "C13", "K3"};
    out.table.rows = parallel_rows(grid.size(), threads, [&](std::size_t i) {
      const auto r = P::lg_run(std::min(grid[i], M_PI), probe, c);
      return std::vector<double>{grid[i], r.c12, r.c23, r.c13, r.k3};
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.table.rows.size(); ++i) {
      if (out.table.rows[i][4] > out.table.rows[best][4]) best = i;
    }
    summary["parameter"] = "theta";
    summary["max_K3"] = out.table.rows[best][4];
    summary["argmax_theta"] = out.table.rows[best][0];
  } else if (protocol == "clf") {
    for (double e : grid) {
      if (e < 0.0) cfg.fail("sweep", "values", "epsilon values must be nonnegative");
    }
    const auto rob = P::clf_robustness(clf_config(cfg), grid);
    out.table.header = {"epsilon", "certified_epsilon", "min_confidence"};
    for (const auto& p : rob.points) out.table.rows.push_back({p.epsilon, p.certified_epsilon, p.min_confidence});
    summary["parameter"] = "epsilon";
    summary["fitted_exponent"] = opt_json(rob.fitted_exponent);
    summary["fitted_c"] = rob.fitted_c;
    summary["bound_holds"] = rob.bound_holds;
    summary["monotone"] = rob.monotone;
  } else if (protocol == "threebox") {
    const double k_prime = cfg.get_double("constants", "k_prime", 1.0);
    const auto probe = oracle_spec(cfg);
    const double sum = P::threebox_ifm(probe, P::BoxContext::A).p_decisive +
                       P::threebox_ifm(probe, P::BoxContext::B).p_decisive;
    out.table.header = {"epsilon", "quantum_sum", "classical_max", "violated"};
    for (double e : grid) {
      if (e < 0.0) cfg.fail("sweep", "values", "epsilon values must be nonnegative");
      const double cl = P::threebox_classical_max(k_prime, e).value;
      out.table.rows.push_back({e, sum, cl, sum > cl + 1e-12 ? 1.0 : 0.0});
    }
    summary["parameter"] = "epsilon";
  } else {
    cfg.fail("sweep", "protocol", "expected zeno, lg, clf or threebox");
  }
  round_floats(summary);
  out.summary = std::move(summary);
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"cflab: counterfactual measurement protocols and classical bounds"};
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> commands = protocols();
  commands.push_back("sweep");
  app.add_option("command", command, "clf | threebox | ghz | pm | lg | lf | certify | zeno | sweep")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "INI config or a previous report JSON");
  app.add_option("--out", out_path, "output path (default: standard output)");
  app.add_option("--seed", seed, "overrides [run] seed");
  app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    Config cfg;
    if (!config_path.empty()) {
      cfg = Config::load(config_path);
    } else if (command == "sweep") {
      throw Error(ErrorKind::ConfigError, "sweep requires --config");
    }
    if (seed) cfg.set("run", "seed", std::to_string(*seed));
    if (cfg.has("run", "protocol") && cfg.get_string("run", "protocol", "") != command) {
      cfg.fail("run", "protocol", "config is for '" + cfg.get_string("run", "protocol", "") + "', not '" + command + "'");
    }

    if (command == "sweep") {
      const auto result = run_sweep(cfg, thread_budget());
      const std::string csv = result.table.render();
      const std::string summary = result.summary.dump(2) + "\n";
      if (out_path.empty()) {
        write_text("", format == "json" ? summary : csv);
      } else {
        write_text(out_path, csv);
        write_text(out_path + ".summary.json", summary);
      }
    } else {
      auto results = run_protocol(command, cfg);
      if (format == "csv") {
        if (command != "zeno") throw Error(ErrorKind::ConfigError, "--format csv is available for zeno and sweep");
        CsvTable t;
        t.header = {"N", "theta", "success", "dose"};
        for (const auto& p : results["points"]) {
          t.rows.push_back({p["N"].get<double>(), p["theta"].get<double>(), p["success"].get<double>(),
                            p["dose"].get<double>()});
        }
        write_text(out_path, t.render());
      } else {
        write_text(out_path, make_report(command, cfg, std::move(results)).dump(2) + "\n");
      }
    }
  } catch (const Error& e) {
    std::cerr << "cflab: " << e.what() << "\n";
    return e.kind() == ErrorKind::NumericalValidation ? kValidationFailure : kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "cflab: internal error: " << e.what() << "\n";
    return kValidationFailure;
  }
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  std::cerr << "cflab: " << command << " finished in " << ms << " ms\n";
  return kOk;
}

}  // namespace cflab::cli
