#include "mixeq/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixeq/analysis.hpp"
#include "mixeq/error.hpp"
#include "mixeq/experiments.hpp"
#include "mixeq/network_file.hpp"
#include "mixeq/oracle.hpp"

namespace mixeq {

namespace {

using nlohmann::json;

struct Loaded {
  Network network;
  PathSet paths;
  IncidenceMatrix delta;
};

Loaded load(const CommandOptions& opt) {
  if (opt.network.empty()) throw Error(Errc::invalid_argument, "--network is required");
  NetworkDocument doc = load_network_file(opt.network);
  PathSet paths = opt.enumerated_paths ? enumerate_paths(doc.network) : doc.path_set();
  IncidenceMatrix delta = incidence_matrix(doc.network, paths);
  return {std::move(doc.network), std::move(paths), std::move(delta)};
}

SolverConfig config(const CommandOptions& opt, double alpha) {
  SolverConfig cfg;
  cfg.alpha = alpha;
  cfg.outer_tol = opt.tol;
  cfg.max_outer = opt.max_outer;
  cfg.validate();
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io_error, "cannot write " + path);
  f << content;
  if (!f) throw Error(Errc::io_error, "write failed for " + path);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

json paths_json(const Loaded& in, const Vector& x_h, const Vector& x_a) {
  json arr = json::array();
  for (std::size_t p = 0; p < in.paths.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    json links = json::array();
    for (std::size_t a : in.paths[p]) links.push_back(in.network.link(a).id);
    arr.push_back({{"links", links}, {"x_h", x_h(i)}, {"x_a", x_a(i)}, {"x", x_h(i) + x_a(i)}});
  }
  return arr;
}

json result_json(const Loaded& in, const EquilibriumResult& r) {
  json links = json::object();
  for (std::size_t a = 0; a < in.network.link_count(); ++a) {
    links[in.network.link(a).id] = r.flow.f(static_cast<Eigen::Index>(a));
  }
  return {{"alpha", r.flow.alpha},       {"social_cost", r.social},
          {"lambda_h", r.lambda_h},      {"lambda_a", r.lambda_a},
          {"gap", r.gap},                {"relative_gap", r.relative_gap},
          {"converged", r.converged},    {"iterations", r.iterations},
          {"mixed_exponents", r.mixed_exponents},
          {"paths", paths_json(in, r.flow.x_h, r.flow.x_a)},
          {"link_flows", links}};
}

void print_paths(std::ostream& out, const Loaded& in, const Vector& x_h, const Vector& x_a) {
  for (std::size_t p = 0; p < in.paths.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    out << "  path " << describe_path(in.network, in.paths[p]) << "  x_h "
        << format_double(x_h(i)) << "  x_a " << format_double(x_a(i)) << "  x "
        << format_double(x_h(i) + x_a(i)) << "\n";
  }
}

std::string support_text(const Loaded& in, const std::vector<std::size_t>& support) {
  std::string s;
  for (std::size_t p : support) {
    if (!s.empty()) s += " ";
    s += describe_path(in.network, in.paths[p]);
  }
  return s.empty() ? "(none)" : s;
}

}  // namespace

int cmd_solve(const CommandOptions& opt, std::ostream& out) {
  const Loaded in = load(opt);
  const SolverConfig cfg = config(opt, opt.alpha);
  const EquilibriumResult r = solve_mixed(in.network, in.delta, cfg);
  out << "alpha " << format_double(r.flow.alpha) << "\n"
      << "converged " << (r.converged ? "true" : "false") << " after " << r.iterations
      << " outer iterations\n"
      << "social_cost " << format_double(r.social) << "\n"
      << "lambda_h " << format_double(r.lambda_h) << "\n"
      << "lambda_a " << format_double(r.lambda_a) << "\n"
      << "gap " << format_double(r.gap) << " (relative " << format_double(r.relative_gap)
      << ")\n";
  if (r.mixed_exponents) out << "note: links use different exponents\n";
  print_paths(out, in, r.flow.x_h, r.flow.x_a);
  json doc = result_json(in, r);
  if (opt.starts > 0) {
    const UniquenessReport u =
        multi_start_uniqueness_check(in.network, in.delta, cfg, opt.starts, opt.seed);
    out << "multi-start: " << u.converged_runs << " converged, " << u.excluded_runs
        << " excluded, max link-flow deviation " << format_double(u.max_f_deviation)
        << ", max social-cost deviation " << format_double(u.max_s_deviation) << "\n";
    doc["uniqueness"] = {{"converged_runs", u.converged_runs},
                         {"excluded_runs", u.excluded_runs},
                         {"max_f_deviation", u.max_f_deviation},
                         {"max_s_deviation", u.max_s_deviation}};
  }
  if (!opt.out.empty()) write_file(opt.out, doc.dump(2) + "\n");
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const CommandOptions& opt, std::ostream& out) {
  if (!(0.0 <= opt.alpha_min && opt.alpha_min <= opt.alpha_max && opt.alpha_max <= 1.0)) {
    throw Error(Errc::invalid_argument, "need 0 <= alpha-min <= alpha-max <= 1");
  }
  const Loaded in = load(opt);
  const SolverConfig cfg = config(opt, opt.alpha_min);
  const SweepResult sweep = alpha_sweep(in.network, in.delta,
                                        linspace(opt.alpha_min, opt.alpha_max, opt.steps), cfg,
                                        sweep_threads());
  const std::string csv = sweep_csv(sweep);
  if (opt.out.empty()) {
    out << csv;
  } else {
    write_file(opt.out, csv);
    out << "wrote " << sweep.rows.size() << " rows to " << opt.out << "\n";
  }
  return sweep.all_converged() ? kExitOk : kExitNotConverged;
}

int cmd_analyze(const CommandOptions& opt, std::ostream& out) {
  const Loaded in = load(opt);
  const SolverConfig cfg = config(opt, opt.alpha);
  const AnalysisVerdict v = analyze(in.network, in.delta, opt.alpha, cfg);
  json doc;
  doc["alpha"] = v.alpha;

  out << "alpha " << format_double(v.alpha) << "\n";
  out << "no_effect " << (v.no_effect.holds ? "holds" : "does not hold");
  if (v.no_effect.b0) out << " (b0 = " << format_double(*v.no_effect.b0) << ")";
  out << "\n";
  doc["no_effect"] = {{"holds", v.no_effect.holds}};
  if (v.no_effect.b0) doc["no_effect"]["b0"] = *v.no_effect.b0;

  if (v.deterioration) {
    const DeteriorationReport& d = *v.deterioration;
    const DeteriorationHypotheses& h = d.hypotheses;
    out << "deterioration " << to_string(d.verdict) << "\n"
        << "  V " << support_text(in, d.v) << "\n";
    if (d.q) out << "  q " << describe_path(in.network, in.paths[*d.q]) << "\n";
    if (d.gamma) out << "  gamma " << format_double(*d.gamma) << "\n";
    if (d.condition_value) out << "  condition_value " << format_double(*d.condition_value) << "\n";
    out << "  hypotheses linear_costs=" << h.linear_costs
        << " delta_v_independent=" << h.delta_v_independent << " q_unique=" << h.q_unique
        << " q_off_support=" << h.q_off_support
        << " strict_off_support_costs=" << h.strict_off_support_costs << "\n";
    if (d.alpha_validity_hint) {
      out << "  alpha_validity_hint " << format_double(*d.alpha_validity_hint)
          << " (window of the constructed equilibrium, not a proven bound)\n";
    }
    json dj = {{"verdict", to_string(d.verdict)},
               {"v", d.v},
               {"hypotheses",
                {{"linear_costs", h.linear_costs},
                 {"delta_v_independent", h.delta_v_independent},
                 {"q_unique", h.q_unique},
                 {"q_off_support", h.q_off_support},
                 {"strict_off_support_costs", h.strict_off_support_costs}}}};
    if (d.q) dj["q"] = *d.q;
    if (d.gamma) dj["gamma"] = *d.gamma;
    if (d.condition_value) dj["condition_value"] = *d.condition_value;
    if (d.alpha_validity_hint) dj["alpha_validity_hint"] = *d.alpha_validity_hint;
    doc["deterioration"] = dj;
  }

  if (v.improvement) {
    const ImprovementCertificate& c = *v.improvement;
    out << "improvement certificate " << (c.holds ? "holds" : "fails")
        << ": constructed baseline S " << format_double(c.social_baseline) << ", mixed S "
        << format_double(c.social_mixed) << "\n";
    doc["improvement"] = {{"holds", c.holds},
                          {"baseline_x", to_std(c.baseline_x)},
                          {"mixed_x_h", to_std(c.mixed_x_h)},
                          {"social_baseline", c.social_baseline},
                          {"social_mixed", c.social_mixed}};
  }

  bool converged = true;
  if (v.centralized) {
    const CentralizedComparison& c = *v.centralized;
    converged = c.converged;
    out << "centralized decentralized S " << format_double(c.social_decentralized)
        << ", centralized S " << format_double(c.social_centralized) << ", deviation "
        << format_double(c.deviation) << (c.converged ? "" : " (not converged)") << "\n";
    doc["centralized"] = {{"social_decentralized", c.social_decentralized},
                          {"social_centralized", c.social_centralized},
                          {"deviation", c.deviation},
                          {"converged", c.converged}};
  }
  for (const auto& s : v.skipped) out << "skipped " << s << "\n";
  doc["skipped"] = v.skipped;

  if (!opt.out.empty()) write_file(opt.out, doc.dump(2) + "\n");
  return converged ? kExitOk : kExitNotConverged;
}

int cmd_oracle(const CommandOptions& opt, std::ostream& out) {
  const Loaded in = load(opt);
  if (!(opt.alpha >= 0.0 && opt.alpha <= 1.0)) {
    throw Error(Errc::invalid_argument, "alpha must lie in [0, 1]");
  }
  json doc;
  if (all_links_linear(in.network)) {
    const ExactEquilibrium eq = exact_mixed(in.network, in.delta, opt.alpha);
    const double gap = vi_gap(in.network, in.delta, eq.flow(in.delta));
    out << "exact equilibrium (support enumeration, " << eq.candidates_tried
        << " candidates)\n"
        << "social_cost " << format_double(eq.social) << "\n"
        << "lambda_h " << format_double(eq.lambda_h) << "\n"
        << "lambda_a " << format_double(eq.lambda_a) << "\n"
        << "gap " << format_double(gap) << "\n"
        << "human support " << support_text(in, eq.support.human) << "\n"
        << "autonomous support " << support_text(in, eq.support.autonomous) << "\n";
    print_paths(out, in, eq.x_h, eq.x_a);
    doc = {{"method", "support_enumeration"}, {"alpha", opt.alpha},
           {"social_cost", eq.social},        {"lambda_h", eq.lambda_h},
           {"lambda_a", eq.lambda_a},         {"gap", gap},
           {"support_human", eq.support.human},
           {"support_autonomous", eq.support.autonomous},
           {"paths", paths_json(in, eq.x_h, eq.x_a)}};
  } else {
    const GridResult g = grid_gap_oracle(in.network, in.delta, opt.alpha, opt.grid_steps);
    const double social = social_cost(in.network, g.flow.f);
    out << "grid search (" << g.evaluated << " points, " << opt.grid_steps
        << " steps per class)\n"
        << "social_cost " << format_double(social) << "\n"
        << "gap " << format_double(g.gap) << "\n";
    print_paths(out, in, g.flow.x_h, g.flow.x_a);
    doc = {{"method", "grid"},    {"alpha", opt.alpha}, {"grid_steps", opt.grid_steps},
           {"social_cost", social}, {"gap", g.gap},
           {"paths", paths_json(in, g.flow.x_h, g.flow.x_a)}};
  }
  if (!opt.out.empty()) write_file(opt.out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_braess(const CommandOptions& opt, std::ostream& out) {
  std::vector<BraessVariant> variants;
  if (opt.variant == "all") {
    variants = {BraessVariant::paper, BraessVariant::deterioration, BraessVariant::sweep_k6,
                BraessVariant::sweep_b6};
  } else if (auto v = parse_braess_variant(opt.variant)) {
    variants = {*v};
  } else {
    throw Error(Errc::invalid_argument, "unknown variant " + opt.variant);
  }
  const std::filesystem::path dir = opt.out.empty() ? "." : opt.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string());

  SolverConfig cfg;
  cfg.outer_tol = opt.tol;
  cfg.max_outer = opt.max_outer;
  cfg.validate();
  bool converged = true;
  for (BraessVariant v : variants) {
    const SweepResult sweep = run_braess(v, cfg, opt.enumerated_paths, sweep_threads());
    const std::filesystem::path file = dir / (std::string("braess_") + to_string(v) + ".csv");
    write_file(file.string(), sweep_csv(sweep));
    converged = converged && sweep.all_converged();
    const auto& first = sweep.rows.front().result;
    const auto& last = sweep.rows.back().result;
    double max_s = first.social;
    for (const auto& row : sweep.rows) max_s = std::max(max_s, row.result.social);
    out << to_string(v) << ": " << sweep.rows.size() << " rows -> " << file.string()
        << "  S first " << format_double(first.social) << ", last " << format_double(last.social)
        << ", max " << format_double(max_s) << "\n";
  }
  return converged ? kExitOk : kExitNotConverged;
}

int cmd_compare_centralized(const CommandOptions& opt, std::ostream& out) {
  const Loaded in = load(opt);
  const SolverConfig cfg = config(opt, opt.alpha);
  const CentralizedComparison c = compare_centralized(in.network, in.delta, opt.alpha, cfg);
  out << "social_decentralized " << format_double(c.social_decentralized) << "\n"
      << "social_centralized " << format_double(c.social_centralized) << "\n"
      << "deviation " << format_double(c.deviation) << "\n"
      << "converged " << (c.converged ? "true" : "false") << "\n";
  if (!opt.out.empty()) {
    json doc = {{"alpha", opt.alpha},
                {"social_decentralized", c.social_decentralized},
                {"social_centralized", c.social_centralized},
                {"deviation", c.deviation},
                {"converged", c.converged}};
    write_file(opt.out, doc.dump(2) + "\n");
  }
  return c.converged ? kExitOk : kExitNotConverged;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibria of mixed human/autonomous traffic on single O/D networks", "mixeq"};
  app.require_subcommand(1);
  CommandOptions opt;

  auto add_network = [&](CLI::App* sub) {
    sub->add_option("--network", opt.network, "network JSON file")->required();
    sub->add_flag("--enumerated-paths", opt.enumerated_paths,
                  "use all directed paths even if the file declares a path list");
  };
  auto add_tol = [&](CLI::App* sub) {
    sub->add_option("--tol", opt.tol, "relative VI-gap tolerance")->capture_default_str();
    sub->add_option("--max-outer", opt.max_outer, "outer iteration cap")->capture_default_str();
  };

  CLI::App* solve = app.add_subcommand("solve", "solve the mixed equilibrium at one alpha");
  add_network(solve);
  solve->add_option("--alpha", opt.alpha, "autonomous fraction in [0, 1]")->capture_default_str();
  solve->add_option("--out", opt.out, "write the result as JSON");
  add_tol(solve);
  solve->add_option("--starts", opt.starts, "extra random starts for a uniqueness check");
  solve->add_option("--seed", opt.seed, "seed for the random starts")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "alpha sweep written as CSV");
  add_network(sweep);
  sweep->add_option("--alpha-min", opt.alpha_min)->capture_default_str();
  sweep->add_option("--alpha-max", opt.alpha_max)->capture_default_str();
  sweep->add_option("--steps", opt.steps, "number of alpha values (>= 2)")->capture_default_str();
  sweep->add_option("--out", opt.out, "CSV file (stdout when omitted)");
  add_tol(sweep);

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "improvement / deterioration / no-effect checks");
  add_network(analyze_cmd);
  analyze_cmd->add_option("--alpha", opt.alpha)->capture_default_str();
  analyze_cmd->add_option("--out", opt.out, "write the verdicts as JSON");
  add_tol(analyze_cmd);

  CLI::App* oracle = app.add_subcommand("oracle", "exact (linear) or grid reference equilibrium");
  add_network(oracle);
  oracle->add_option("--alpha", opt.alpha)->capture_default_str();
  oracle->add_option("--grid-steps", opt.grid_steps, "grid resolution for nonlinear costs")
      ->capture_default_str();
  oracle->add_option("--out", opt.out, "write the result as JSON");

  CLI::App* braess = app.add_subcommand("braess", "built-in modified Braess experiments");
  braess->add_option("--variant", opt.variant, "paper, deterioration, sweep_k6, sweep_b6 or all")
      ->capture_default_str();
  braess->add_option("--out", opt.out, "output directory")->capture_default_str();
  braess->add_flag("--enumerated-paths", opt.enumerated_paths,
                   "use the 4 directed paths instead of the declared 5-path list");
  add_tol(braess);

  CLI::App* central = app.add_subcommand("compare-centralized",
                                         "decentralized vs centralized autonomous routing");
  add_network(central);
  central->add_option("--alpha", opt.alpha)->capture_default_str();
  central->add_option("--out", opt.out, "write the comparison as JSON");
  add_tol(central);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (*solve) return cmd_solve(opt, out);
    if (*sweep) return cmd_sweep(opt, out);
    if (*analyze_cmd) return cmd_analyze(opt, out);
    if (*oracle) return cmd_oracle(opt, out);
    if (*braess) return cmd_braess(opt, out);
    if (*central) return cmd_compare_centralized(opt, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace mixeq
