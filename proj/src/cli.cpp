#include "mzsim/cli.hpp"

#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mzsim/analysis.hpp"
#include "mzsim/errors.hpp"
#include "mzsim/experiment.hpp"
#include "mzsim/io.hpp"

namespace mzsim {

namespace {

struct GlobalFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> photons;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool trace = false;
  unsigned parallel = 1;
};

struct SweepFlags {
  std::size_t steps = 50;
  std::optional<double> delta_max;
};

ExperimentConfig resolve_config(const GlobalFlags& g, std::optional<double> delta) {
  ExperimentConfig c = g.config ? load_config(*g.config) : reference_config();
  if (g.seed) c.master_seed = *g.seed;
  if (g.photons) c.photon_count = *g.photons;
  if (delta) c.delta = *delta;
  c.validate();
  return c;
}

OutputFormat resolve_format(const GlobalFlags& g) {
  if (g.format) return *parse_format(*g.format);
  if (g.out && std::filesystem::path(*g.out).extension() == ".json") return OutputFormat::Json;
  return OutputFormat::Csv;
}

void write_record(const OutputRecord& record, const GlobalFlags& g, std::ostream& out) {
  const auto format = resolve_format(g);
  if (g.trace && format == OutputFormat::Csv) {
    if (!g.out) throw UsageError("--trace with csv output needs --out (trace goes to <out>.trace.csv)");
    write_text_file(*g.out + ".trace.csv", trace_to_csv(record.results));
  }
  if (g.out) {
    emit_results(record, format, *g.out);
  } else {
    out << (format == OutputFormat::Json ? to_json(record) : to_csv(record));
  }
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string analysis_text(const SweepResult& sweep, const SweepAnalysis& a) {
  std::ostringstream ss;
  ss << "points: " << sweep.points.size() << "\n";
  if (a.fit) {
    const auto& f = *a.fit;
    ss << "fit: offset=" << fixed(f.offset) << " amplitude=" << fixed(f.amplitude)
       << " angular_frequency=" << fixed(f.angular_frequency) << " period=" << fixed(f.period())
       << " phase=" << fixed(f.phase.radians()) << " r_squared=" << fixed(f.r_squared)
       << " converged=" << (f.converged ? "yes" : "no") << "\n";
    ss << "visibility: raw=" << fixed(a.raw_visibility) << " fitted=" << fixed(*a.fitted_visibility) << "\n";
    ss << "extremes: raw_min=" << fixed(a.raw_min) << " raw_max=" << fixed(a.raw_max)
       << " fitted_min=" << fixed(*a.fitted_min) << " fitted_max=" << fixed(*a.fitted_max) << "\n";
  } else {
    ss << "fit: skipped (need at least " << kFitMinPoints << " points over 2+ deltas)\n";
    ss << "visibility: raw=" << fixed(a.raw_visibility) << "\n";
    ss << "extremes: raw_min=" << fixed(a.raw_min) << " raw_max=" << fixed(a.raw_max) << "\n";
  }
  ss << "confidence intervals (" << fixed(100.0 * a.confidence, 1) << "%, " << kIntervalMethod << "):\n";
  ss << "delta,d1,d2,d1_fraction,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    ss << fixed(p.delta) << ',' << p.counts.d1 << ',' << p.counts.d2 << ',' << fixed(p.d1_fraction)
       << ',' << fixed(a.intervals[i].lo) << ',' << fixed(a.intervals[i].hi) << "\n";
  }
  return ss.str();
}

std::string qm_text(const SweepResult& sweep, const QmComparison& q, double nu) {
  std::ostringstream ss;
  ss << "nu: " << fixed(nu) << "\n";
  ss << "visibility: model=" << fixed(q.model_visibility) << " ideal=" << fixed(q.ideal_visibility)
     << " gap=" << fixed(q.visibility_gap) << "\n";
  ss << "period: expected=" << fixed(q.expected_period);
  if (q.fitted_period) {
    ss << " fitted=" << fixed(*q.fitted_period) << " relative_error=" << fixed(*q.period_relative_error);
  }
  ss << "\n";
  ss << "note: a model visibility below the ideal 1.0 is a property of the particle model\n";
  ss << "delta,d1_fraction,qm_reference,residual\n";
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    const auto& p = sweep.points[i];
    ss << fixed(p.delta) << ',' << fixed(p.d1_fraction) << ',' << fixed(qm_reference(p.delta, nu))
       << ',' << fixed(q.residuals[i]) << "\n";
  }
  return ss.str();
}

void write_report(const std::string& text, const GlobalFlags& g, std::ostream& out) {
  if (g.out) write_text_file(*g.out, text);
  else out << text;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deterministic-particle Mach-Zehnder interference simulator", "mzsim"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  SweepFlags sw;
  std::optional<double> mzi_delta;
  std::string results_file;

  app.add_option("--config", g.config, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (u64)");
  app.add_option("--photons", g.photons, "photons per run")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output path (default: stdout)");
  app.add_option("--format", g.format, "csv or json (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--trace", g.trace, "record per-photon outcomes");
  app.add_option("--parallel", g.parallel, "sweep points run concurrently")->check(CLI::PositiveNumber);

  auto* single = app.add_subcommand("single-bs", "stream photons onto one beam splitter");
  auto* mzi = app.add_subcommand("mzi", "two-splitter interferometer at one path difference");
  mzi->add_option("--delta", mzi_delta, "path difference (overrides config)")
      ->check(CLI::NonNegativeNumber);
  auto* sweep = app.add_subcommand("sweep", "interferometer over a range of path differences");
  sweep->add_option("--steps", sw.steps, "number of path differences")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--delta-max", sw.delta_max, "largest path difference (default: two periods)")
      ->check(CLI::NonNegativeNumber);
  auto* analyze = app.add_subcommand("analyze", "fit, visibility and intervals of a results file");
  analyze->add_option("results-file", results_file)->required()->check(CLI::ExistingFile);
  auto* compare = app.add_subcommand("compare-qm", "compare a results file with ideal interference");
  compare->add_option("results-file", results_file)->required()->check(CLI::ExistingFile);
  for (auto* sub : {single, mzi, sweep, analyze, compare}) sub->fallthrough();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << app.help() << "mzsim: error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*single || *mzi || *sweep) {
      const auto config = resolve_config(g, *mzi ? mzi_delta : std::nullopt);
      SweepResult results;
      std::string command;
      if (*single) {
        command = "single-bs";
        results = as_sweep(run_single_bs(config, {g.trace}));
      } else if (*mzi) {
        command = "mzi";
        results = as_sweep(run_mzi(config, {g.trace}));
      } else {
        command = "sweep";
        const auto deltas = default_deltas(config, sw.steps, sw.delta_max);
        results = run_sweep(config, deltas, {g.trace, g.parallel});
      }
      auto record = make_record(command, config, std::move(results));
      if (*sweep) record.qm_comparison = compare_to_qm(record.results, config.particle_frequency);
      write_record(record, g, out);
      return kExitOk;
    }

    const auto loaded = load_results(results_file);
    const bool json_out = g.format && *g.format == "json";
    if (*analyze) {
      const auto a = analyze_sweep(loaded.results);
      if (json_out) {
        OutputRecord r = loaded;
        r.analysis = a;
        write_report(to_json(r), g, out);
      } else {
        write_report(analysis_text(loaded.results, a), g, out);
      }
    } else {
      // CSV tables carry no config; take nu from --config or the defaults.
      const double nu = loaded.command.empty()
                            ? (g.config ? load_config(*g.config) : reference_config()).particle_frequency
                            : loaded.config.particle_frequency;
      const auto q = compare_to_qm(loaded.results, nu);
      if (json_out) {
        OutputRecord r = loaded;
        r.qm_comparison = q;
        write_report(to_json(r), g, out);
      } else {
        write_report(qm_text(loaded.results, q, nu), g, out);
      }
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "mzsim: usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mzsim: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace mzsim
