// Command-line front end: instance generation, the solvers, exact baselines,
// reference bounds, and the trial runner. Data goes to stdout (or --out);
// progress and diagnostics go to stderr.
//
// Exit codes: 0 success, 1 bad usage or arguments, 2 runtime failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdap/mdap.hpp"

namespace {

using nlohmann::json;

struct InstanceArgs {
  std::string input;
  int n = 0;
  std::uint64_t seed = 0;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& args) {
  cmd->add_option("--input", args.input, "instance file (mdap-instance-v1 JSON)");
  cmd->add_option("--n", args.n, "side length for a sampled instance");
  cmd->add_option("--seed", args.seed, "seed for a sampled instance")->default_val(0);
}

// Load --input if given, otherwise sample an Exp(1) instance from --n/--seed.
mdap::CostTensor resolve_instance(const InstanceArgs& args, int d) {
  if (!args.input.empty()) {
    if (args.n != 0)
      throw mdap::PreconditionError("give --input or --n, not both");
    mdap::CostTensor t = mdap::CostTensor::load_file(args.input);
    if (t.d() != d)
      throw mdap::PreconditionError("instance has d=" + std::to_string(t.d()) +
                                    ", this command needs d=" + std::to_string(d));
    return t;
  }
  if (args.n < 1)
    throw mdap::PreconditionError("need --input or --n");
  return mdap::CostTensor::sample(args.n, d, args.seed);
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream os(out_path);
  if (!os) {
    std::cerr << "cannot open for writing: " << out_path << "\n";
    return 2;
  }
  os << text;
  return 0;
}

json json_or_null(double v) {
  return std::isnan(v) ? json{} : json(v);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random 3-dimensional assignment: solvers, bounds, benchmarks"};
  app.require_subcommand(1);

  // ---- gen ----
  int gen_n = 0, gen_d = 3;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "sample an instance and write it as JSON");
  gen->add_option("--n", gen_n, "side length")->required();
  gen->add_option("--d", gen_d, "dimension")->default_val(3);
  gen->add_option("--seed", gen_seed, "sampling seed")->default_val(0);
  gen->add_option("--out", gen_out, "output file (default stdout)");

  // ---- solve ----
  CLI::App* solve = app.add_subcommand("solve", "run a heuristic solver");
  solve->require_subcommand(1);

  InstanceArgs sb_args;
  int sb_k = 1, sb_retries = 8;
  std::string sb_mode = "distributional", sb_out;
  CLI::App* sb = solve->add_subcommand("planar-bdts", "tree-search planar heuristic");
  add_instance_options(sb, sb_args);
  sb->add_option("--k", sb_k, "tree depth")->default_val(1);
  sb->add_option("--mode", sb_mode, "distributional | fixed")->default_val("distributional");
  sb->add_option("--retries", sb_retries, "budget doublings before giving up")->default_val(8);
  sb->add_option("--out", sb_out, "output file (default stdout)");

  InstanceArgs sa_args;
  std::string sa_out;
  CLI::App* sa = solve->add_subcommand("axial-greedy", "slice-by-slice axial heuristic");
  add_instance_options(sa, sa_args);
  sa->add_option("--out", sa_out, "output file (default stdout)");

  InstanceArgs sl_args;
  int sl_iters = 100;
  bool sl_max = false;
  std::string sl_out;
  CLI::App* sl = solve->add_subcommand("bilinear", "alternating planar descent");
  add_instance_options(sl, sl_args);
  sl->add_option("--max-iters", sl_iters, "iteration cap")->default_val(100);
  sl->add_flag("--maximize", sl_max, "climb instead of descend");
  sl->add_option("--out", sl_out, "output file (default stdout)");

  // ---- exact ----
  CLI::App* exact = app.add_subcommand("exact", "enumerate the exact optimum");
  exact->require_subcommand(1);

  InstanceArgs ep_args;
  std::string ep_out;
  CLI::App* ep = exact->add_subcommand("planar", "optimal planar assignment (small n)");
  add_instance_options(ep, ep_args);
  ep->add_option("--out", ep_out, "output file (default stdout)");

  InstanceArgs ea_args;
  std::string ea_out;
  CLI::App* ea = exact->add_subcommand("axial", "optimal axial assignment (small n)");
  add_instance_options(ea, ea_args);
  ea->add_option("--out", ea_out, "output file (default stdout)");

  InstanceArgs em_args;
  std::string em_out;
  CLI::App* em = exact->add_subcommand("matching", "optimal 2-dimensional assignment");
  add_instance_options(em, em_args);
  em->add_option("--out", em_out, "output file (default stdout)");

  // ---- bound ----
  CLI::App* bound = app.add_subcommand("bound", "reference values and lower bounds");
  bound->require_subcommand(1);

  int bp_n = 0;
  std::string bp_out;
  CLI::App* bp = bound->add_subcommand("parisi", "expected optimal matching cost, sum 1/i^2");
  bp->add_option("--n", bp_n, "matching size")->required();
  bp->add_option("--out", bp_out, "output file (default stdout)");

  InstanceArgs br_args;
  std::string br_out;
  CLI::App* br = bound->add_subcommand("planar-rowmin", "row-minimum planar lower bound");
  add_instance_options(br, br_args);
  br->add_option("--out", br_out, "output file (default stdout)");

  InstanceArgs bs_args;
  std::string bs_out;
  CLI::App* bs = bound->add_subcommand("axial-slices", "per-slab matching axial lower bound");
  add_instance_options(bs, bs_args);
  bs->add_option("--out", bs_out, "output file (default stdout)");

  int bd_n = 0;
  std::string bd_out;
  CLI::App* bd = bound->add_subcommand("dfm", "axial slice cost reference curve 2n/(n-i+1)");
  bd->add_option("--n", bd_n, "side length")->required();
  bd->add_option("--out", bd_out, "output file (default stdout)");

  // ---- bench ----
  std::string bench_algo, bench_mode = "distributional", bench_format = "csv", bench_out;
  std::vector<int> bench_ns;
  int bench_k = 1, bench_trials = 1, bench_retries = 8, bench_jobs = 0, bench_iters = 100;
  std::uint64_t bench_seed = 0;
  bool bench_no_timing = false;
  CLI::App* bench = app.add_subcommand("bench", "run trials across sizes and seeds");
  bench->add_option("--algo", bench_algo, "planar-bdts | axial-greedy | bilinear | matching")
      ->required();
  bench->add_option("--n", bench_ns, "side lengths, comma separated")
      ->required()
      ->delimiter(',');
  bench->add_option("--k", bench_k, "tree depth (planar-bdts)")->default_val(1);
  bench->add_option("--trials", bench_trials, "trials per size")->default_val(1);
  bench->add_option("--seed", bench_seed, "master seed")->default_val(0);
  bench->add_option("--mode", bench_mode, "planar-bdts: distributional | fixed")
      ->default_val("distributional");
  bench->add_option("--retries", bench_retries, "budget doublings before giving up")
      ->default_val(8);
  bench->add_option("--jobs", bench_jobs, "worker threads, 0 = all cores")->default_val(0);
  bench->add_option("--max-iters", bench_iters, "iteration cap (bilinear)")->default_val(100);
  bench->add_option("--format", bench_format, "csv | jsonl")->default_val("csv");
  bench->add_flag("--no-timing", bench_no_timing, "zero the runtime column for reproducible output");
  bench->add_option("--out", bench_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      mdap::CostTensor t = mdap::CostTensor::sample(gen_n, gen_d, gen_seed);
      std::ostringstream os;
      t.save(os);
      return emit(os.str(), gen_out);
    }

    if (sb->parsed()) {
      mdap::BdtsOptions opts;
      opts.k = sb_k;
      opts.escalation_cap = sb_retries;
      opts.keep_trace = false;
      json j;
      j["algo"] = "planar-bdts";
      j["mode"] = sb_mode;
      j["k"] = sb_k;
      mdap::BdtsResult res = [&] {
        if (sb_mode == "distributional") {
          if (!sb_args.input.empty())
            throw mdap::PreconditionError(
                "distributional mode draws costs on demand; use --mode fixed with --input");
          if (sb_args.n < 1) throw mdap::PreconditionError("need --n");
          j["n"] = sb_args.n;
          j["seed"] = sb_args.seed;
          return mdap::bdts_distributional(sb_args.n, sb_args.seed, opts);
        }
        if (sb_mode != "fixed")
          throw mdap::PreconditionError("--mode must be distributional or fixed");
        mdap::CostTensor t = resolve_instance(sb_args, 3);
        j["n"] = t.n();
        if (t.seed())
          j["seed"] = *t.seed();
        else
          j["seed"] = nullptr;
        return mdap::bdts_fixed(t, opts);
      }();
      j["cost"] = res.report.total_cost;
      j["cost_upper"] = json_or_null(res.report.upper_bound_cost);
      j["escalations"] = res.report.escalations;
      j["rounds"] = res.report.rounds_executed;
      j["augmentations"] = res.report.augmentations;
      j["sigma"] = res.assignment.sigma;
      j["pi"] = res.assignment.pi;
      return emit(j.dump() + "\n", sb_out);
    }

    if (sa->parsed()) {
      mdap::CostTensor t = resolve_instance(sa_args, 3);
      mdap::AxialResult res = mdap::axial_greedy(t);
      json j;
      j["algo"] = "axial-greedy";
      j["n"] = t.n();
      j["cost"] = res.report.total;
      j["slice_cost"] = res.report.slice_cost;
      j["slice_bound"] = res.report.slice_bound;
      j["K"] = res.assignment.K;
      return emit(j.dump() + "\n", sa_out);
    }

    if (sl->parsed()) {
      mdap::CostTensor t = resolve_instance(sl_args, 3);
      auto id = mdap::identity_permutation(t.n());
      mdap::BilinearResult res = mdap::bilinear_alternate(t, id, id, sl_iters, sl_max);
      json j;
      j["algo"] = "bilinear";
      j["n"] = t.n();
      j["value"] = res.final.value;
      j["iterations"] = res.final.iteration;
      j["converged"] = res.converged;
      j["trace"] = res.trace;
      j["y"] = res.final.y;
      j["z"] = res.final.z;
      return emit(j.dump() + "\n", sl_out);
    }

    if (ep->parsed()) {
      mdap::CostTensor t = resolve_instance(ep_args, 3);
      mdap::PlanarSolution res = mdap::exact_planar_hybrid(t);
      json j;
      j["solver"] = "exact-planar";
      j["n"] = t.n();
      j["cost"] = res.cost;
      j["sigma"] = res.assignment.sigma;
      j["pi"] = res.assignment.pi;
      return emit(j.dump() + "\n", ep_out);
    }

    if (ea->parsed()) {
      mdap::CostTensor t = resolve_instance(ea_args, 3);
      mdap::AxialSolution res = mdap::exact_axial(t);
      json j;
      j["solver"] = "exact-axial";
      j["n"] = t.n();
      j["cost"] = res.cost;
      j["K"] = res.assignment.K;
      return emit(j.dump() + "\n", ea_out);
    }

    if (em->parsed()) {
      mdap::CostTensor t = resolve_instance(em_args, 2);
      mdap::MatchResult res =
          mdap::min_cost_matching(mdap::MatchMatrix::from_flat(t.n(), t.costs()));
      json j;
      j["solver"] = "exact-matching";
      j["n"] = t.n();
      j["cost"] = res.cost;
      j["perm"] = res.perm;
      return emit(j.dump() + "\n", em_out);
    }

    if (bp->parsed()) {
      return emit(fixed6(mdap::parisi_value(bp_n)) + "\n", bp_out);
    }

    if (br->parsed()) {
      mdap::CostTensor t = resolve_instance(br_args, 3);
      json j;
      j["bound"] = "planar-rowmin";
      j["n"] = t.n();
      j["value"] = mdap::planar_row_min_lower_bound(t);
      return emit(j.dump() + "\n", br_out);
    }

    if (bs->parsed()) {
      mdap::CostTensor t = resolve_instance(bs_args, 3);
      json j;
      j["bound"] = "axial-slices";
      j["n"] = t.n();
      j["value"] = mdap::axial_lower_bound(t);
      return emit(j.dump() + "\n", bs_out);
    }

    if (bd->parsed()) {
      json j;
      j["bound"] = "dfm";
      j["n"] = bd_n;
      std::vector<double> per_slice;
      double total = 0.0;
      for (int i = 1; i <= bd_n; ++i) {
        per_slice.push_back(mdap::dfm_slice_bound(i, bd_n));
        total += per_slice.back();
      }
      j["per_slice"] = per_slice;
      j["total"] = total;
      return emit(j.dump() + "\n", bd_out);
    }

    if (bench->parsed()) {
      if (bench_format != "csv" && bench_format != "jsonl")
        throw mdap::PreconditionError("--format must be csv or jsonl");
      mdap::ExperimentConfig cfg;
      cfg.algo = bench_algo;
      cfg.ns = bench_ns;
      cfg.k = bench_k;
      cfg.trials = bench_trials;
      cfg.master_seed = bench_seed;
      cfg.mode = bench_mode;
      cfg.escalation_cap = bench_retries;
      cfg.jobs = bench_jobs;
      cfg.max_iters = bench_iters;
      cfg.record_timing = !bench_no_timing;
      std::vector<int> uniq = bench_ns;
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      const std::size_t planned = uniq.size() * static_cast<std::size_t>(bench_trials);
      std::size_t done = 0;
      std::vector<mdap::TrialRecord> recs =
          mdap::run_trials(cfg, [&](const mdap::TrialRecord& r) {
            ++done;
            std::cerr << "[" << done << "/" << planned << "] " << r.algo << " n=" << r.n
                      << " trial=" << r.trial << " cost=" << mdap::format_double(r.cost)
                      << "\n";
          });
      std::ostringstream os;
      if (bench_format == "csv")
        mdap::write_csv(os, recs);
      else
        mdap::write_jsonl(os, recs);
      return emit(os.str(), bench_out);
    }
  } catch (const mdap::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::cerr << "no subcommand selected\n";
  return 1;
}
