// rq: command-line front end for the random-quotient laboratory.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rq/ball.hpp"
#include "rq/diagrams.hpp"
#include "rq/measure.hpp"
#include "rq/model.hpp"
#include "rq/phase.hpp"
#include "rq/records.hpp"
#include "rq/spectra.hpp"

namespace {

using namespace rq;

int log_level() {
  const char* v = std::getenv("RQ_LOG");
  return v ? std::atoi(v) : 0;
}

void logmsg(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "rq: " << msg << "\n";
}

struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw input_error("cannot open output file: " + path);
      os = &file;
    }
  }
  std::ostream& stream() { return *os; }
};

BigRat parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  if (slash != std::string::npos)
    return BigRat(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
  const auto dot = s.find('.');
  if (dot == std::string::npos) return BigRat(BigInt(s));
  const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  BigInt den = 1;
  for (std::size_t i = dot + 1; i < s.size(); ++i) den *= 10;
  return BigRat(BigInt(digits), den);
}

// Shared sampling flags: either --in FILE or a measure description.
struct SampleArgs {
  std::string in;
  std::string measure = "reduced";
  std::string group;
  int m = 2;
  int ell = 12;
  int L = 1;
  double density = 0.25;
  std::uint64_t seed = 1;
  std::uint64_t count = 0;  // 0: density formula
  std::uint64_t budget_samples = 10000000;
  std::size_t budget_ball = 5000000;

  void attach(CLI::App* cmd, bool with_in) {
    if (with_in) cmd->add_option("--in", in, "read a relator set file");
    cmd->add_option("--measure", measure, "plain|reduced|cyclic|geodesic");
    cmd->add_option("--group", group, "group expression (geodesic measure)");
    cmd->add_option("--m", m, "named generators");
    cmd->add_option("--ell", ell, "relator length");
    cmd->add_option("--L", L, "geodesic annulus halfwidth");
    cmd->add_option("--density", density, "density d");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--count", count, "override the relator count");
    cmd->add_option("--budget-samples", budget_samples, "max relators");
    cmd->add_option("--budget-ball", budget_ball, "max ball nodes");
  }

  RelatorSet load_or_sample() const {
    if (!in.empty()) {
      std::ifstream f(in);
      if (!f) throw input_error("cannot open relator file: " + in);
      return RelatorSet::deserialize(f);
    }
    MeasureSpec spec(measure_from_name(measure), m, ell,
                     measure_from_name(measure) == MeasureKind::Geodesic ? L : 0);
    if (spec.kind == MeasureKind::Geodesic) {
      if (group.empty())
        throw input_error("geodesic sampling needs --group");
      const GroupModel model = GroupModel::parse(group);
      spec.alphabet = model.alphabet();
      spec.attach_ball(std::make_shared<const CayleyBall>(model, ell + L, budget_ball));
    }
    RngStream rng(seed, 0);
    std::optional<std::uint64_t> override_count;
    if (count > 0) override_count = count;
    return sample_relator_set(spec, density, rng, seed, override_count,
                              budget_samples);
  }

  Json config_json() const {
    Json c;
    if (!in.empty()) {
      c["in"] = in;
      return c;
    }
    c["measure"] = measure;
    if (!group.empty()) c["group"] = group;
    c["m"] = m;
    c["ell"] = ell;
    if (measure_from_name(measure) == MeasureKind::Geodesic) c["L"] = L;
    c["density"] = density;
    c["count"] = count;
    return c;
  }
};

double closed_lambda(const GroupModel& model) {
  if (model.free_rank() > 0) return lambda_free(model.free_rank());
  if (model.free_times_z2_rank() > 0)
    return kesten_z2_product(model.free_times_z2_rank());
  throw input_error("no closed form for this group; use --method ball or mc");
}

int run_spectra(const std::string& group, std::string quantity, std::string method,
                int t, int radius, int ell, std::uint64_t trials,
                std::uint64_t seed, std::size_t budget_ball,
                const std::string& measure, Sink& out) {
  const GroupModel model = GroupModel::parse(group);
  const int letters = model.alphabet().size();
  const int m = letters / 2;
  if (quantity == "theta") quantity = "gross-cogrowth";
  if (quantity == "eta") quantity = "cogrowth";

  Json payload;
  payload["group"] = model.expr();
  payload["quantity"] = quantity;
  payload["method"] = method;

  if (quantity == "gross-cogrowth") {
    if (method == "dp") {
      const ReturnSeries series = return_prob_exact(model, t);
      const ThetaEstimate est = gross_cogrowth_from_series(series);
      payload["t"] = est.t;
      payload["base"] = est.base;
      payload["raw"] = est.raw;
      payload["value"] = est.extrapolated;
    } else if (method == "closed") {
      if (model.free_rank() > 0)
        payload["value"] = theta_free_closed(model.free_rank());
      else
        payload["value"] = theta_from_lambda(closed_lambda(model), letters);
      payload["base"] = letters;
    } else {
      throw input_error("gross-cogrowth: method must be dp or closed");
    }
  } else if (quantity == "lambda") {
    if (method == "closed") {
      payload["value"] = closed_lambda(model);
    } else if (method == "ball") {
      const CayleyBall ball(model, radius, budget_ball);
      const SpectralEstimate est = spectral_radius_ball(ball);
      payload["value"] = est.value;
      payload["radius"] = radius;
      payload["lower_bound"] = true;
    } else {
      throw input_error("lambda: method must be closed or ball");
    }
  } else if (quantity == "cogrowth") {
    if (method == "conversion") {
      const double theta = model.free_rank() > 0
                               ? theta_free_closed(model.free_rank())
                               : theta_from_lambda(closed_lambda(model), letters);
      payload["value"] = eta_from_theta(theta, m);
      payload["base"] = letters - 1;
    } else if (method == "mc") {
      RngStream rng(seed, 0);
      const SpectralEstimate est = cogrowth_mc_reduced(model, ell, trials, rng);
      payload["value"] = est.value;
      payload["stderr"] = est.stderr_;
      payload["censored"] = est.censored;
      payload["ell"] = ell;
      payload["trials"] = trials;
    } else {
      throw input_error("cogrowth: method must be conversion or mc");
    }
  } else if (quantity == "growth") {
    const CayleyBall ball(model, radius, budget_ball);
    const SpectralEstimate est = growth_estimate(ball, letters);
    payload["value"] = est.value;
    payload["radius"] = radius;
  } else if (quantity == "critical-density") {
    const MeasureKind kind = measure_from_name(measure);
    double est = 0.0;
    if (kind == MeasureKind::Plain) {
      est = model.free_rank() > 0 ? theta_free_closed(model.free_rank())
                                  : theta_from_lambda(closed_lambda(model), letters);
    } else if (kind != MeasureKind::Geodesic) {
      const double theta = model.free_rank() > 0
                               ? theta_free_closed(model.free_rank())
                               : theta_from_lambda(closed_lambda(model), letters);
      est = eta_from_theta(theta, m);
    }
    payload["measure"] = measure;
    payload["value"] = critical_density(kind, est);
  } else {
    throw input_error("unknown quantity: " + quantity);
  }

  Json config{{"group", group}, {"quantity", quantity}, {"method", method}};
  write_jsonl(out.stream(), make_record("spectra", seed, config, payload));
  return 0;
}

int run_collapse(const SampleArgs& args, Sink& out) {
  const RelatorSet rs = args.load_or_sample();
  const MeasureKind kind = rs.spec().kind;
  Json payload;
  payload["measure"] = measure_name(kind);
  payload["n_words"] = rs.size();

  std::vector<LetterPair> ids;
  std::vector<int> kills;
  bool all_even = rs.spec().ell % 2 == 0;
  if (kind == MeasureKind::Geodesic) {
    if (args.group.empty()) throw input_error("geodesic collapse needs --group");
    const GroupModel model = GroupModel::parse(args.group);
    const CayleyBall ball(model, rs.spec().ell + rs.spec().L, args.budget_ball);
    const auto scan = geodesic_collapse_scan(rs, ball);
    kills = scan.killed_generators;
    all_even = rs.spec().L == 0 && rs.spec().ell % 2 == 0;
    payload["scan_hits"] = scan.witnesses.size();
  } else {
    const auto scan = prefix_collision_scan(rs);
    payload["collisions"] = scan.collision_pairs;
    ids = scan.identifications;
    if (kind == MeasureKind::Plain) {
      const GroupModel model =
          args.group.empty() ? GroupModel::free_group(rs.spec().m)
                             : GroupModel::parse(args.group);
      const auto wab = plain_word_collapse_scan(model, rs);
      payload["scan_hits"] = wab.collision_pairs;
      for (auto p : wab.identifications)
        if (std::find(ids.begin(), ids.end(), p) == ids.end()) ids.push_back(p);
    }
  }
  const CollapseReport rep =
      letter_collapse_verdict(ids, kills, rs.spec().m, all_even);
  payload["identifications"] = ids.size();
  payload["killed_generators"] = kills;
  payload["letter_classes"] = rep.letter_classes;
  payload["verdict"] = verdict_name(rep.verdict);
  write_jsonl(out.stream(), make_record("collapse", args.seed, args.config_json(),
                                        payload));
  return 0;
}

int run_sweep(const std::string& config_path, SweepConfig cfg,
              const std::set<std::string>& overridden, const std::string& csv_path,
              Sink& out) {
  if (!config_path.empty()) {
    const Json file = load_config_file(config_path);
    for (const auto& [key, value] : file.items()) {
      if (overridden.count(key)) continue;  // flags win
      if (key == "group") cfg.group_expr = value.get<std::string>();
      else if (key == "measure") cfg.measure = measure_from_name(value.get<std::string>());
      else if (key == "m") cfg.m = value.get<int>();
      else if (key == "L") cfg.L = value.get<int>();
      else if (key == "ells") cfg.ells = value.get<std::vector<int>>();
      else if (key == "densities") cfg.densities = value.get<std::vector<double>>();
      else if (key == "trials") cfg.trials = value.get<int>();
      else if (key == "seed") cfg.master_seed = value.get<std::uint64_t>();
      else if (key == "budget") cfg.budget = value.get<std::uint64_t>();
      else if (key == "ball_budget") cfg.ball_budget = value.get<std::uint64_t>();
      else throw input_error("sweep config: unknown key `" + key + "`");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const auto records = phase_sweep(cfg);
  Json config;
  config["group"] = cfg.group_expr;
  config["measure"] = measure_name(cfg.measure);
  config["m"] = cfg.m;
  config["ells"] = cfg.ells;
  config["densities"] = cfg.densities;
  config["trials"] = cfg.trials;
  for (const auto& r : records)
    write_jsonl(out.stream(),
                make_record("sweep", cfg.master_seed, config, sweep_record_json(r)));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_jsonl(out.stream(), make_meta(wall));
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw input_error("cannot open csv file: " + csv_path);
    csv << sweep_csv(records);
  }
  return 0;
}

int run_sc_check(const SampleArgs& args, bool threshold_only, Sink& out) {
  const RelatorSet rs = args.load_or_sample();
  const SmallCancellationReport rep = small_cancellation_check(rs, threshold_only);
  Json payload;
  payload["n_words"] = rs.size();
  payload["ell"] = rep.ell;
  payload["max_piece"] = rep.max_piece;
  payload["max_piece_exact"] = rep.max_piece_exact;
  payload["ratio"] = rep.ratio;
  payload["satisfies_c16"] = rep.satisfies;
  if (rep.witness) {
    const auto& w = *rep.witness;
    payload["witness"] = Json{{"word_a", w.word_a}, {"inv_a", w.inv_a},
                              {"shift_a", w.shift_a}, {"word_b", w.word_b},
                              {"inv_b", w.inv_b},   {"shift_b", w.shift_b},
                              {"length", w.length}};
  }
  write_jsonl(out.stream(),
              make_record("sc-check", args.seed, args.config_json(), payload));
  return 0;
}

Json dims_json(const GammaDims& dims) {
  Json j;
  j["components"] = dims.components;
  Json ds = Json::array();
  for (const auto& d : dims.dims) {
    std::ostringstream s;
    s << d;
    ds.push_back(s.str());
  }
  j["dims"] = ds;
  j["min_index"] = dims.min_index;
  std::ostringstream s;
  s << dims.min_dim;
  j["min_dim"] = s.str();
  return j;
}

int run_davkd_analyze(const std::string& file, const std::string& density,
                      bool count_fulfill, int m, std::uint64_t seed, Sink& out) {
  std::ifstream f(file);
  if (!f) throw input_error("cannot open davkd file: " + file);
  std::stringstream buf;
  buf << f.rdbuf();
  const Davkd d = Davkd::parse(buf.str());
  const BigRat dens = parse_rational(density);

  Json payload;
  payload["faces"] = d.n_faces();
  payload["ell"] = d.ell;
  payload["pairings"] = d.pairings.size();
  payload["boundary_length"] = d.boundary_length();
  payload["planar_checked"] = d.planar_checked;
  payload["reduced"] = reduction_check(d);
  const IsoReport iso = iso_check(d, dens);
  payload["gamma"] = dims_json(iso.dims);
  payload["corollary_satisfied"] = iso.corollary_satisfied;
  payload["lemma_satisfied"] = iso.lemma_satisfied;
  if (count_fulfill) {
    const FulfillCount fc = count_fulfilling_reduced(d, m);
    payload["fulfill_count"] = fc.count.str();
    payload["satisfiable"] = fc.satisfiable;
    if (fc.satisfiable) {
      Json ws = Json::array();
      Alphabet alpha(m);
      for (const auto& w : fc.witness) ws.push_back(alpha.format(w));
      payload["witness"] = ws;
    }
  }
  Json config{{"file", file}, {"density", density}};
  write_jsonl(out.stream(), make_record("davkd-analyze", seed, config, payload));
  return 0;
}

int run_davkd_enumerate(int K, int ell, bool check_lemma, std::uint64_t seed,
                        Sink& out) {
  std::uint64_t count = 0, lemma_violations = 0, boundary_violations = 0;
  const std::vector<BigRat> densities{BigRat(0), BigRat(1, 4), BigRat(1, 2)};
  enumerate_davkd(K, ell, [&](const Davkd& d) {
    ++count;
    if (!check_lemma) return;
    const GammaGraph gamma = build_gamma(d);
    if (d.boundary_length() + 2 * static_cast<int>(gamma.edges.size()) !=
        d.n_faces() * d.ell)
      ++boundary_violations;
    for (const auto& dens : densities)
      if (!iso_check(d, dens).lemma_satisfied) ++lemma_violations;
  });
  Json payload;
  payload["K"] = K;
  payload["ell"] = ell;
  payload["count"] = count;
  if (check_lemma) {
    payload["lemma_violations"] = lemma_violations;
    payload["boundary_violations"] = boundary_violations;
  }
  Json config{{"K", K}, {"ell", ell}};
  write_jsonl(out.stream(), make_record("davkd-enumerate", seed, config, payload));
  return 0;
}

int run_ball(const std::string& group, int radius, std::size_t budget,
             std::uint64_t seed, Sink& out) {
  const GroupModel model = GroupModel::parse(group);
  const CayleyBall ball(model, radius, budget);
  Json payload;
  payload["group"] = model.expr();
  payload["radius"] = radius;
  payload["size"] = ball.size();
  payload["sphere_sizes"] = ball.sphere_sizes();
  const SpectralEstimate g = growth_estimate(ball, model.alphabet().size());
  payload["growth_estimate"] = g.value;
  Json config{{"group", group}, {"radius", radius}};
  write_jsonl(out.stream(), make_record("ball", seed, config, payload));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rq: random quotients of groups in the density model"};
  app.require_subcommand(1);

  std::string out_path, csv_path;
  int threads = 1;
  app.add_option("--out", out_path, "JSONL output path (default stdout)");
  app.add_option("--csv", csv_path, "CSV output path (sweep)");
  app.add_option("--threads", threads, "worker threads (records stay ordered)");
  app.fallthrough();

  // sample
  auto* sample = app.add_subcommand("sample", "draw a relator multiset");
  SampleArgs sample_args;
  sample_args.attach(sample, false);

  // spectra
  auto* spectra = app.add_subcommand("spectra", "spectral quantities");
  std::string sp_group = "free(2)", sp_quantity = "gross-cogrowth",
              sp_method = "closed", sp_measure = "plain";
  int sp_t = 2000, sp_radius = 6, sp_ell = 40;
  std::uint64_t sp_trials = 100000, sp_seed = 1;
  std::size_t sp_ball_budget = 5000000;
  spectra->add_option("--group", sp_group, "group expression");
  spectra->add_option("--quantity", sp_quantity,
                      "growth|cogrowth|gross-cogrowth|lambda|critical-density "
                      "(aliases theta, eta)");
  spectra->add_option("--method", sp_method, "closed|dp|mc|ball|conversion");
  spectra->add_option("--t", sp_t, "DP horizon");
  spectra->add_option("--radius", sp_radius, "ball radius");
  spectra->add_option("--ell", sp_ell, "MC word length");
  spectra->add_option("--trials", sp_trials, "MC trials");
  spectra->add_option("--seed", sp_seed, "seed");
  spectra->add_option("--measure", sp_measure, "measure for critical-density");
  spectra->add_option("--budget-ball", sp_ball_budget, "max ball nodes");

  // collapse
  auto* collapse = app.add_subcommand("collapse", "triviality scans");
  SampleArgs collapse_args;
  collapse_args.attach(collapse, true);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "phase-transition sweep");
  std::string sweep_config;
  SweepConfig sweep_cfg;
  std::string sweep_measure;
  sweep->add_option("--config", sweep_config, "TOML/JSON config file");
  auto* og = sweep->add_option("--group", sweep_cfg.group_expr, "group expression");
  auto* om = sweep->add_option("--measure", sweep_measure, "word measure");
  auto* omm = sweep->add_option("--m", sweep_cfg.m, "generators");
  auto* oL = sweep->add_option("--L", sweep_cfg.L, "annulus halfwidth");
  auto* oe = sweep->add_option("--ell", sweep_cfg.ells, "lengths");
  auto* od = sweep->add_option("--density", sweep_cfg.densities, "densities");
  auto* ot = sweep->add_option("--trials", sweep_cfg.trials, "trials per cell");
  auto* os_ = sweep->add_option("--seed", sweep_cfg.master_seed, "master seed");
  auto* ob = sweep->add_option("--budget-samples", sweep_cfg.budget, "max relators");
  auto* obb = sweep->add_option("--budget-ball", sweep_cfg.ball_budget, "ball nodes");

  // sc-check
  auto* sc = app.add_subcommand("sc-check", "small cancellation C'(1/6)");
  SampleArgs sc_args;
  sc_args.measure = "cyclic";
  sc_args.attach(sc, true);
  bool sc_threshold = false;
  sc->add_flag("--threshold-only", sc_threshold,
               "only decide the 1/6 threshold (streaming, large sets)");

  // davkd
  auto* davkd = app.add_subcommand("davkd", "van Kampen diagram analysis");
  davkd->require_subcommand(1);
  auto* analyze = davkd->add_subcommand("analyze", "analyze a davkd file");
  std::string dk_file, dk_density = "1/4";
  bool dk_count = false;
  int dk_m = 2;
  std::uint64_t dk_seed = 1;
  analyze->add_option("--file", dk_file, "davkd text file")->required();
  analyze->add_option("--density", dk_density, "density (rational like 1/4)");
  analyze->add_flag("--count-fulfill", dk_count, "exact fulfilling count");
  analyze->add_option("--m", dk_m, "generators for counting");
  auto* enumerate = davkd->add_subcommand("enumerate", "enumerate K <= 2 shapes");
  int en_K = 2, en_ell = 8;
  bool en_lemma = false;
  enumerate->add_option("--K", en_K, "faces (1 or 2)");
  enumerate->add_option("--ell", en_ell, "perimeter");
  enumerate->add_flag("--check-lemma", en_lemma, "verify the dimension lemma");

  // ball
  auto* ballcmd = app.add_subcommand("ball", "exact Cayley ball");
  std::string bl_group = "free(2)";
  int bl_radius = 6;
  std::size_t bl_budget = 5000000;
  std::uint64_t bl_seed = 1;
  ballcmd->add_option("--group", bl_group, "group expression");
  ballcmd->add_option("--radius", bl_radius, "radius");
  ballcmd->add_option("--budget-ball", bl_budget, "max nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (threads < 1) throw input_error("--threads must be positive");
    Sink out(out_path);
    if (sample->parsed()) {
      const RelatorSet rs = sample_args.load_or_sample();
      rs.serialize(out.stream());
      logmsg(1, "sampled " + std::to_string(rs.size()) + " relators");
      return 0;
    }
    if (spectra->parsed())
      return run_spectra(sp_group, sp_quantity, sp_method, sp_t, sp_radius, sp_ell,
                         sp_trials, sp_seed, sp_ball_budget, sp_measure, out);
    if (collapse->parsed()) return run_collapse(collapse_args, out);
    if (sweep->parsed()) {
      std::set<std::string> overridden;
      if (og->count()) overridden.insert("group");
      if (om->count()) {
        overridden.insert("measure");
        sweep_cfg.measure = measure_from_name(sweep_measure);
      }
      if (omm->count()) overridden.insert("m");
      if (oL->count()) overridden.insert("L");
      if (oe->count()) overridden.insert("ells");
      if (od->count()) overridden.insert("densities");
      if (ot->count()) overridden.insert("trials");
      if (os_->count()) overridden.insert("seed");
      if (ob->count()) overridden.insert("budget");
      if (obb->count()) overridden.insert("ball_budget");
      return run_sweep(sweep_config, sweep_cfg, overridden, csv_path, out);
    }
    if (sc->parsed()) return run_sc_check(sc_args, sc_threshold, out);
    if (analyze->parsed())
      return run_davkd_analyze(dk_file, dk_density, dk_count, dk_m, dk_seed, out);
    if (enumerate->parsed())
      return run_davkd_enumerate(en_K, en_ell, en_lemma, dk_seed, out);
    if (ballcmd->parsed())
      return run_ball(bl_group, bl_radius, bl_budget, bl_seed, out);
    throw input_error("no subcommand");
  } catch (const input_error& e) {
    std::cerr << "rq: input error: " << e.what() << "\n";
    return 2;
  } catch (const capacity_error& e) {
    std::cerr << "rq: capacity error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "rq: numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "rq: internal error: " << e.what() << "\n";
    return 5;
  }
}
