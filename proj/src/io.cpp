#include "mzsim/io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "mzsim/errors.hpp"
#include "mzsim/rng.hpp"

#ifndef MZSIM_VERSION
#define MZSIM_VERSION "dev"
#endif

namespace mzsim {

using nlohmann::json;

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

// ---- config ----------------------------------------------------------------

namespace {

json splitter_json(const SplitterConfig& s) {
  return {{"frequency", s.frequency},
          {"initial_offset", s.initial_offset.radians()},
          {"update_alpha", s.update_alpha},
          {"update_beta", s.update_beta}};
}

json config_json(const ExperimentConfig& c) {
  json phase = c.particle_initial_phase.kind == InitialPhase::Kind::Fixed
                   ? json{{"fixed", c.particle_initial_phase.value.radians()}}
                   : json("uniform");
  return {{"photon_count", c.photon_count},
          {"source_rate", c.source_rate},
          {"inter_arrival_law", std::string(to_string(c.inter_arrival_law))},
          {"particle_frequency", c.particle_frequency},
          {"particle_initial_phase", phase},
          {"bs1", splitter_json(c.bs1)},
          {"bs2", splitter_json(c.bs2)},
          {"base_path_length", c.base_path_length},
          {"delta", c.delta},
          {"master_seed", c.master_seed},
          {"carry_memory", c.carry_memory}};
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw UnknownKeyError(prefix + key);
  }
}

double real_field(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::uint64_t count_field(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be >= 0");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d < 0x1.0p64 && d == std::floor(d)) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(field, "expected a non-negative integer");
}

Phase phase_field(const json& v, const std::string& field) {
  const double r = real_field(v, field);
  if (!std::isfinite(r)) throw ConfigError(field, "must be finite");
  return wrap_phase(r);
}

SplitterConfig splitter_from(const json& j, SplitterConfig s, const std::string& name) {
  if (!j.is_object()) throw ConfigError(name, "expected an object");
  reject_unknown(j, {"frequency", "initial_offset", "update_alpha", "update_beta"}, name + ".");
  if (j.contains("frequency")) s.frequency = real_field(j["frequency"], name + ".frequency");
  if (j.contains("initial_offset")) s.initial_offset = phase_field(j["initial_offset"], name + ".initial_offset");
  if (j.contains("update_alpha")) s.update_alpha = real_field(j["update_alpha"], name + ".update_alpha");
  if (j.contains("update_beta")) s.update_beta = real_field(j["update_beta"], name + ".update_beta");
  return s;
}

ExperimentConfig config_from(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  reject_unknown(j,
                 {"photon_count", "source_rate", "inter_arrival_law", "particle_frequency",
                  "particle_initial_phase", "bs1", "bs2", "base_path_length", "delta",
                  "master_seed", "carry_memory"},
                 "");
  ExperimentConfig c = reference_config();
  if (j.contains("photon_count")) c.photon_count = count_field(j["photon_count"], "photon_count");
  if (j.contains("source_rate")) c.source_rate = real_field(j["source_rate"], "source_rate");
  if (j.contains("inter_arrival_law")) {
    const auto& v = j["inter_arrival_law"];
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "exponential") c.inter_arrival_law = InterArrivalLaw::Exponential;
    else if (s == "uniform") c.inter_arrival_law = InterArrivalLaw::Uniform;
    else if (s == "fixed") c.inter_arrival_law = InterArrivalLaw::Fixed;
    else throw ConfigError("inter_arrival_law", "expected \"exponential\", \"uniform\" or \"fixed\"");
  }
  if (j.contains("particle_frequency")) {
    c.particle_frequency = real_field(j["particle_frequency"], "particle_frequency");
  }
  if (j.contains("particle_initial_phase")) {
    const auto& v = j["particle_initial_phase"];
    if (v.is_string() && v.get<std::string>() == "uniform") {
      c.particle_initial_phase = InitialPhase::uniform();
    } else if (v.is_object() && v.size() == 1 && v.contains("fixed")) {
      c.particle_initial_phase =
          InitialPhase::fixed(phase_field(v["fixed"], "particle_initial_phase.fixed"));
    } else {
      throw ConfigError("particle_initial_phase", "expected \"uniform\" or {\"fixed\": <radians>}");
    }
  }
  if (j.contains("bs1")) c.bs1 = splitter_from(j["bs1"], c.bs1, "bs1");
  if (j.contains("bs2")) c.bs2 = splitter_from(j["bs2"], c.bs2, "bs2");
  if (j.contains("base_path_length")) {
    c.base_path_length = real_field(j["base_path_length"], "base_path_length");
  }
  if (j.contains("delta")) c.delta = real_field(j["delta"], "delta");
  if (j.contains("master_seed")) c.master_seed = count_field(j["master_seed"], "master_seed");
  if (j.contains("carry_memory")) {
    if (!j["carry_memory"].is_boolean()) throw ConfigError("carry_memory", "expected true or false");
    c.carry_memory = j["carry_memory"].get<bool>();
  }
  c.validate();
  return c;
}

json parse_json_text(std::string_view text, std::string_view origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(origin) + ": malformed JSON: " + e.what());
  }
}

bool blank(std::string_view text) {
  return text.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  if (blank(text)) return reference_config();
  return config_from(parse_json_text(text, origin));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_config(text, path.string());
  } catch (const UnknownKeyError& e) {
    throw UnknownKeyError(e.field(), path.string());
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), std::string(e.what()).substr(e.field().size() + 2) + " (in " +
                                     path.string() + ")");
  }
}

// ---- results ---------------------------------------------------------------

std::string build_identifier() {
  return std::string("mzsim ") + MZSIM_VERSION + " (" +
#if defined(__clang__)
         "clang " __clang_version__
#elif defined(__GNUC__)
         "gcc " __VERSION__
#else
         "unknown compiler"
#endif
         + ")";
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SweepResult as_sweep(const RunRecord& run) {
  SweepResult s;
  s.points.push_back({run.delta, run.stream_seed, run.counts, run.counts.d1_fraction(), run.trace});
  return s;
}

OutputRecord make_record(std::string command, const ExperimentConfig& config, SweepResult results) {
  OutputRecord r;
  r.command = std::move(command);
  r.config = config;
  r.results = std::move(results);
  r.analysis = analyze_sweep(r.results);
  r.provenance = {config.master_seed, std::string(kChildSeedFunction), build_identifier(),
                  utc_timestamp()};
  return r;
}

namespace {

Outcome outcome_from(const json& v) {
  const auto s = v.get<std::string>();
  if (s == "reflect") return Outcome::Reflect;
  if (s == "transmit") return Outcome::Transmit;
  throw ParseError("unknown outcome '" + s + "'");
}

PathTag path_from(const json& v) {
  const auto s = v.get<std::string>();
  if (s == "unsplit") return PathTag::Unsplit;
  if (s == "path1") return PathTag::Path1;
  if (s == "path2") return PathTag::Path2;
  throw ParseError("unknown path '" + s + "'");
}

json trace_json(const std::vector<TraceEntry>& trace) {
  json arr = json::array();
  for (const auto& e : trace) {
    arr.push_back({{"emitted_at", e.emitted_at},
                   {"bs1", std::string(to_string(e.bs1))},
                   {"path", std::string(to_string(e.path))},
                   {"bs2", e.bs2 ? json(std::string(to_string(*e.bs2))) : json(nullptr)}});
  }
  return arr;
}

std::vector<TraceEntry> trace_from(const json& arr) {
  std::vector<TraceEntry> out;
  out.reserve(arr.size());
  for (const auto& e : arr) {
    TraceEntry t;
    t.emitted_at = e.at("emitted_at").get<double>();
    t.bs1 = outcome_from(e.at("bs1"));
    t.path = path_from(e.at("path"));
    if (!e.at("bs2").is_null()) t.bs2 = outcome_from(e.at("bs2"));
    out.push_back(t);
  }
  return out;
}

json interval_json(const IntervalEstimate& i) {
  return {{"point", i.point}, {"lo", i.lo}, {"hi", i.hi}, {"confidence", i.confidence}};
}

IntervalEstimate interval_from(const json& j) {
  return {j.at("point").get<double>(), j.at("lo").get<double>(), j.at("hi").get<double>(),
          j.at("confidence").get<double>()};
}

json fit_json(const SineFit& f) {
  return {{"amplitude", f.amplitude},     {"angular_frequency", f.angular_frequency},
          {"phase", f.phase.radians()},   {"offset", f.offset},
          {"r_squared", f.r_squared},     {"converged", f.converged},
          {"iterations", f.iterations}};
}

SineFit fit_from(const json& j) {
  SineFit f;
  f.amplitude = j.at("amplitude").get<double>();
  f.angular_frequency = j.at("angular_frequency").get<double>();
  f.phase = wrap_phase(j.at("phase").get<double>());
  f.offset = j.at("offset").get<double>();
  f.r_squared = j.at("r_squared").get<double>();
  f.converged = j.at("converged").get<bool>();
  f.iterations = j.at("iterations").get<int>();
  return f;
}

template <class T, class F>
json opt_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

template <class T, class F>
std::optional<T> opt_from(const json& j, const char* key, F&& f) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return f(j.at(key));
}

auto as_double = [](const json& v) { return v.get<double>(); };
auto id_double = [](double v) { return json(v); };

json analysis_json(const SweepAnalysis& a) {
  json intervals = json::array();
  for (const auto& i : a.intervals) intervals.push_back(interval_json(i));
  return {{"interval_method", std::string(kIntervalMethod)},
          {"confidence", a.confidence},
          {"intervals", intervals},
          {"raw_visibility", a.raw_visibility},
          {"raw_min", a.raw_min},
          {"raw_max", a.raw_max},
          {"fit", opt_json(a.fit, fit_json)},
          {"fitted_min", opt_json(a.fitted_min, id_double)},
          {"fitted_max", opt_json(a.fitted_max, id_double)},
          {"fitted_visibility", opt_json(a.fitted_visibility, id_double)}};
}

SweepAnalysis analysis_from(const json& j) {
  SweepAnalysis a;
  a.confidence = j.at("confidence").get<double>();
  for (const auto& i : j.at("intervals")) a.intervals.push_back(interval_from(i));
  a.raw_visibility = j.at("raw_visibility").get<double>();
  a.raw_min = j.at("raw_min").get<double>();
  a.raw_max = j.at("raw_max").get<double>();
  a.fit = opt_from<SineFit>(j, "fit", fit_from);
  a.fitted_min = opt_from<double>(j, "fitted_min", as_double);
  a.fitted_max = opt_from<double>(j, "fitted_max", as_double);
  a.fitted_visibility = opt_from<double>(j, "fitted_visibility", as_double);
  return a;
}

json qm_json(const QmComparison& q) {
  return {{"residuals", q.residuals},
          {"model_visibility", q.model_visibility},
          {"ideal_visibility", q.ideal_visibility},
          {"visibility_gap", q.visibility_gap},
          {"expected_period", q.expected_period},
          {"fit", opt_json(q.fit, fit_json)},
          {"fitted_period", opt_json(q.fitted_period, id_double)},
          {"period_relative_error", opt_json(q.period_relative_error, id_double)}};
}

QmComparison qm_from(const json& j) {
  QmComparison q;
  q.residuals = j.at("residuals").get<std::vector<double>>();
  q.model_visibility = j.at("model_visibility").get<double>();
  q.ideal_visibility = j.at("ideal_visibility").get<double>();
  q.visibility_gap = j.at("visibility_gap").get<double>();
  q.expected_period = j.at("expected_period").get<double>();
  q.fit = opt_from<SineFit>(j, "fit", fit_from);
  q.fitted_period = opt_from<double>(j, "fitted_period", as_double);
  q.period_relative_error = opt_from<double>(j, "period_relative_error", as_double);
  return q;
}

}  // namespace

std::string to_json(const OutputRecord& record) {
  json results = json::array();
  for (const auto& p : record.results.points) {
    json point = {{"delta", p.delta},
                  {"stream_seed", p.stream_seed},
                  {"d1", p.counts.d1},
                  {"d2", p.counts.d2},
                  {"d1_fraction", p.d1_fraction}};
    if (p.trace) point["trace"] = trace_json(*p.trace);
    results.push_back(std::move(point));
  }
  json j = {{"schema_version", record.schema_version},
            {"command", record.command},
            {"config", config_json(record.config)},
            {"results", results},
            {"analysis", opt_json(record.analysis, analysis_json)},
            {"qm_comparison", opt_json(record.qm_comparison, qm_json)},
            {"provenance",
             {{"master_seed", record.provenance.master_seed},
              {"child_seed_function", record.provenance.child_seed_function},
              {"build", record.provenance.build},
              {"timestamp", record.provenance.timestamp}}}};
  return j.dump(2) + "\n";
}

OutputRecord parse_record_json(std::string_view text, std::string_view origin) {
  const json j = parse_json_text(text, origin);
  try {
    OutputRecord r;
    r.schema_version = j.at("schema_version").get<std::string>();
    if (r.schema_version != kSchemaVersion) {
      throw ParseError(std::string(origin) + ": unsupported schema_version '" + r.schema_version + "'");
    }
    r.command = j.at("command").get<std::string>();
    r.config = config_from(j.at("config"));
    for (const auto& p : j.at("results")) {
      SweepPoint pt;
      pt.delta = p.at("delta").get<double>();
      pt.stream_seed = p.at("stream_seed").get<std::uint64_t>();
      pt.counts = {p.at("d1").get<std::uint64_t>(), p.at("d2").get<std::uint64_t>()};
      pt.d1_fraction = p.at("d1_fraction").get<double>();
      if (p.contains("trace")) pt.trace = trace_from(p.at("trace"));
      r.results.points.push_back(std::move(pt));
    }
    r.analysis = opt_from<SweepAnalysis>(j, "analysis", analysis_from);
    r.qm_comparison = opt_from<QmComparison>(j, "qm_comparison", qm_from);
    const auto& prov = j.at("provenance");
    r.provenance = {prov.at("master_seed").get<std::uint64_t>(),
                    prov.at("child_seed_function").get<std::string>(),
                    prov.at("build").get<std::string>(), prov.at("timestamp").get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string(origin) + ": not a results record: " + e.what());
  }
}

std::string to_csv(const SweepResult& results) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& p : results.points) {
    const auto ci = binomial_ci(p.counts.d1, p.counts.total());
    out += format_double(p.delta) + ',' + std::to_string(p.counts.d1) + ',' +
           std::to_string(p.counts.d2) + ',' + format_double(p.d1_fraction) + ',' +
           format_double(ci.lo) + ',' + format_double(ci.hi) + '\n';
  }
  return out;
}

std::string to_csv(const OutputRecord& record) { return to_csv(record.results); }

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::string_view origin, std::size_t line) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(std::string(origin) + ":" + std::to_string(line) + ": bad number '" +
                     std::string(s) + "'");
  }
  return v;
}

}  // namespace

SweepResult parse_sweep_csv(std::string_view text, std::string_view origin) {
  SweepResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError(std::string(origin) + ": expected header '" + std::string(kCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 6) {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 6 columns");
    }
    SweepPoint p;
    p.delta = parse_number<double>(f[0], origin, line_no);
    p.counts = {parse_number<std::uint64_t>(f[1], origin, line_no),
                parse_number<std::uint64_t>(f[2], origin, line_no)};
    p.d1_fraction = p.counts.d1_fraction();
    result.points.push_back(p);
  }
  if (!header_seen) throw ParseError(std::string(origin) + ": empty CSV");
  if (result.points.empty()) throw ParseError(std::string(origin) + ": CSV has no data rows");
  return result;
}

std::string trace_to_csv(const SweepResult& results) {
  std::string out(kTraceCsvHeader);
  out += '\n';
  for (const auto& p : results.points) {
    if (!p.trace) continue;
    std::size_t i = 0;
    for (const auto& e : *p.trace) {
      out += format_double(p.delta) + ',' + std::to_string(i++) + ',' + format_double(e.emitted_at) +
             ',' + std::string(to_string(e.bs1)) + ',' + std::string(to_string(e.path)) + ',' +
             (e.bs2 ? std::string(to_string(*e.bs2)) : std::string()) + '\n';
    }
  }
  return out;
}

void emit_results(const OutputRecord& record, OutputFormat format, const std::filesystem::path& path) {
  write_text_file(path, format == OutputFormat::Json ? to_json(record) : to_csv(record));
}

OutputRecord load_results(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_record_json(text, path.string());
  OutputRecord r;
  r.results = parse_sweep_csv(text, path.string());
  return r;
}

}  // namespace mzsim
