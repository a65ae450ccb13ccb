#include "cpss/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cpss {

namespace {

using nlohmann::json;

std::array<int, 2> per_cell_counts(const json& j, const std::string& key,
                                   std::array<int, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (v.is_number_integer()) return {v.get<int>(), v.get<int>()};
  if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
    return {v[0].get<int>(), v[1].get<int>()};
  throw ConfigError(key + " must be an integer or a two-element integer array");
}

std::vector<double> number_list(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
    return out;
  }
  if (!v.is_array()) throw ConfigError(key + " must be a number or an array of numbers");
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(key + " must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

void check_known_keys(const json& j, const std::set<std::string>& allowed,
                      const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown " + where + " key: " + key);
  }
}

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

std::vector<double> weights_for_cell(const ScenarioConfig& config, int cell) {
  if (config.weights.empty()) return {};
  std::vector<double> w(static_cast<size_t>(config.topo.users_per_cell[cell]), 1.0);
  for (size_t i = 0; i < w.size() && i < config.weights.size(); ++i) w[i] = config.weights[i];
  return w;
}

std::string fmt6(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fmt4(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string fmt_px(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

MetricsRow make_row(const std::string& method, const std::string& sweep, double sweep_value,
                    double snr_db, const std::vector<double>& values,
                    const std::vector<double>& iterations) {
  MetricsRow row;
  row.method = method;
  row.sweep = sweep;
  row.sweep_value = sweep_value;
  row.snr_db = snr_db;
  row.samples = static_cast<int>(values.size());
  if (!values.empty()) {
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean_wsr = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - row.mean_wsr) * (v - row.mean_wsr);
      const double variance = ss / static_cast<double>(values.size() - 1);
      row.std_error = std::sqrt(variance / static_cast<double>(values.size()));
    }
  }
  if (!iterations.empty()) {
    double sum = 0.0;
    for (double v : iterations) sum += v;
    row.mean_iters = sum / static_cast<double>(iterations.size());
  }
  return row;
}

void sort_rows(std::vector<MetricsRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    return a.snr_db < b.snr_db;
  });
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << content;
  if (!out) throw Error("write failed: " + path);
}

}  // namespace

void ScenarioConfig::validate() const {
  topo.validate();
  wmmse.validate();
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (snr_db.empty()) throw ConfigError("snr_db must be nonempty");
  for (double s : snr_db)
    if (!std::isfinite(s)) throw ConfigError("snr_db values must be finite");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("weights must be finite and >= 0");
  methods_of(*this);  // rejects unknown method names

  if (sweep != "iterations" && sweep != "snr" && sweep != "users")
    throw ConfigError("sweep must be iterations, snr, or users");
  // For the snr sweep an empty list falls back to snr_db.
  if (sweep_values.empty() && sweep != "snr")
    throw ConfigError("sweep_values must be nonempty");
  for (double v : sweep_values) {
    if (sweep == "snr") {
      if (!std::isfinite(v)) throw ConfigError("sweep_values must be finite");
    } else if (!is_integral(v) || v < 1.0) {
      throw ConfigError("sweep_values must be integers >= 1 for the " + sweep + " sweep");
    }
  }
}

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::set<std::string> kKeys = {
      "users_per_cell", "tx_antennas",  "rx_antennas", "dedicated_subcarriers",
      "shared_subcarriers", "snr_db",   "samples",     "master_seed",
      "method",             "weights",  "wmmse",       "sweep",
      "sweep_values"};
  check_known_keys(j, kKeys, "config");

  ScenarioConfig config;
  try {
    config.topo.users_per_cell = per_cell_counts(j, "users_per_cell", config.topo.users_per_cell);
    config.topo.tx_antennas = per_cell_counts(j, "tx_antennas", config.topo.tx_antennas);
    config.topo.rx_antennas = per_cell_counts(j, "rx_antennas", config.topo.rx_antennas);
    config.topo.dedicated_subcarriers =
        per_cell_counts(j, "dedicated_subcarriers", config.topo.dedicated_subcarriers);
    if (j.contains("shared_subcarriers"))
      config.topo.shared_subcarriers = j.at("shared_subcarriers").get<int>();
    if (j.contains("snr_db")) config.snr_db = number_list(j.at("snr_db"), "snr_db");
    if (j.contains("samples")) config.samples = j.at("samples").get<int>();
    if (j.contains("master_seed")) config.master_seed = j.at("master_seed").get<uint64_t>();
    if (j.contains("method")) config.method = j.at("method").get<std::string>();
    if (j.contains("weights")) config.weights = number_list(j.at("weights"), "weights");
    if (j.contains("sweep")) config.sweep = j.at("sweep").get<std::string>();
    if (j.contains("sweep_values"))
      config.sweep_values = number_list(j.at("sweep_values"), "sweep_values");
    if (j.contains("wmmse")) {
      const json& w = j.at("wmmse");
      if (!w.is_object()) throw ConfigError("wmmse must be an object");
      static const std::set<std::string> kWmmseKeys = {"epsilon", "max_iterations",
                                                       "bisection_tolerance",
                                                       "bisection_max_steps"};
      check_known_keys(w, kWmmseKeys, "wmmse");
      if (w.contains("epsilon")) config.wmmse.epsilon = w.at("epsilon").get<double>();
      if (w.contains("max_iterations"))
        config.wmmse.max_iterations = w.at("max_iterations").get<int>();
      if (w.contains("bisection_tolerance"))
        config.wmmse.bisection_tolerance = w.at("bisection_tolerance").get<double>();
      if (w.contains("bisection_max_steps"))
        config.wmmse.bisection_max_steps = w.at("bisection_max_steps").get<int>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  if (config.sweep == "snr" && config.sweep_values.empty()) config.sweep_values = config.snr_db;
  config.validate();
  return config;
}

std::vector<AllocationMethod> methods_of(const ScenarioConfig& config) {
  const std::string& m = config.method;
  if (m == "gale_shapley" || m == "gs") return {AllocationMethod::GaleShapley};
  if (m == "transportation" || m == "tp") return {AllocationMethod::Transportation};
  if (m == "both") return {AllocationMethod::GaleShapley, AllocationMethod::Transportation};
  throw ConfigError("method must be gale_shapley, transportation, or both");
}

std::string method_token(AllocationMethod method) {
  return method == AllocationMethod::GaleShapley ? "gs" : "tp";
}

SampleResult run_sample(const ScenarioConfig& config, uint64_t sample_index,
                        AllocationMethod method) {
  const double snr = config.snr_db.front();
  const double p_max = std::pow(10.0, snr / 10.0);

  ChannelSet channels = build_channel_set(config.topo, 1.0, config.master_seed, sample_index);
  std::array<CellProblem, 2> problems;
  for (int cell = 0; cell < kNumCells; ++cell) {
    Assignment assignment =
        allocate_two_stage(channels, cell, method, config.topo.tx_antennas[cell]);
    if (assignment.matched_count() + static_cast<int>(assignment.unmatched.size()) !=
        config.topo.users_per_cell[cell])
      throw SolverError("allocation lost track of a user");
    problems[cell] =
        make_cell_problem(channels, cell, assignment, p_max, weights_for_cell(config, cell));
    init_precoders(problems[cell], config.master_seed, sample_index);
  }

  WmmseResult solved = wmmse_solve(problems, config.wmmse);
  SampleResult out;
  out.trace = std::move(solved.trace);
  out.final_wsr = out.trace.empty() ? 0.0 : out.trace.back();
  out.iterations = solved.iterations;
  out.converged = solved.converged;
  return out;
}

ExperimentResult run_experiment(const ScenarioConfig& config) {
  config.validate();
  ExperimentResult result;

  const std::vector<double> axis =
      (config.sweep == "snr" && config.sweep_values.empty()) ? config.snr_db
                                                             : config.sweep_values;

  // One grid point: `samples` runs of a fully resolved config. Failures are
  // logged and excluded; aggregation order follows the sample index.
  auto run_point = [&](const ScenarioConfig& point, AllocationMethod method,
                       std::vector<SampleResult>& completed) {
    for (int sample = 0; sample < point.samples; ++sample) {
      ++result.attempted;
      try {
        completed.push_back(run_sample(point, static_cast<uint64_t>(sample), method));
      } catch (const std::exception& e) {
        ++result.failed;
        std::ostringstream note;
        note << method_token(method) << " snr=" << point.snr_db.front()
             << " users=" << point.topo.users_per_cell[0] << " sample=" << sample << ": "
             << e.what();
        result.failure_log.push_back(note.str());
      }
    }
  };

  auto collect = [](const std::vector<SampleResult>& completed) {
    std::vector<double> iters;
    iters.reserve(completed.size());
    for (const SampleResult& s : completed) iters.push_back(static_cast<double>(s.iterations));
    return iters;
  };

  for (AllocationMethod method : methods_of(config)) {
    const std::string token = method_token(method);
    if (config.sweep == "iterations") {
      for (double snr : config.snr_db) {
        ScenarioConfig point = config;
        point.snr_db = {snr};
        std::vector<SampleResult> completed;
        run_point(point, method, completed);
        const std::vector<double> iters = collect(completed);
        for (double k : axis) {
          std::vector<double> values;
          values.reserve(completed.size());
          for (const SampleResult& s : completed) {
            const size_t idx = std::min(static_cast<size_t>(k), s.trace.size());
            values.push_back(idx == 0 ? 0.0 : s.trace[idx - 1]);
          }
          result.table.rows.push_back(make_row(token, "iterations", k, snr, values, iters));
        }
      }
    } else if (config.sweep == "snr") {
      for (double snr : axis) {
        ScenarioConfig point = config;
        point.snr_db = {snr};
        std::vector<SampleResult> completed;
        run_point(point, method, completed);
        std::vector<double> finals;
        finals.reserve(completed.size());
        for (const SampleResult& s : completed) finals.push_back(s.final_wsr);
        result.table.rows.push_back(
            make_row(token, "snr", snr, snr, finals, collect(completed)));
      }
    } else {
      for (double users : axis) {
        for (double snr : config.snr_db) {
          ScenarioConfig point = config;
          point.topo.users_per_cell = {static_cast<int>(users), static_cast<int>(users)};
          point.snr_db = {snr};
          std::vector<SampleResult> completed;
          run_point(point, method, completed);
          std::vector<double> finals;
          finals.reserve(completed.size());
          for (const SampleResult& s : completed) finals.push_back(s.final_wsr);
          result.table.rows.push_back(
              make_row(token, "users", users, snr, finals, collect(completed)));
        }
      }
    }
  }

  sort_rows(result.table.rows);
  return result;
}

std::string render_csv(const MetricsTable& table) {
  std::vector<MetricsRow> rows = table.rows;
  sort_rows(rows);
  std::string out = "method,sweep,sweep_value,snr_db,mean_wsr,std_error,samples,mean_iters\n";
  for (const MetricsRow& row : rows) {
    out += row.method;
    out += ',';
    out += row.sweep;
    out += ',';
    out += fmt6(row.sweep_value);
    out += ',';
    out += fmt6(row.snr_db);
    out += ',';
    out += fmt6(row.mean_wsr);
    out += ',';
    out += fmt6(row.std_error);
    out += ',';
    out += std::to_string(row.samples);
    out += ',';
    out += fmt6(row.mean_iters);
    out += '\n';
  }
  return out;
}

void emit_csv(const MetricsTable& table, const std::string& path) {
  write_file(path, render_csv(table));
}

MetricsTable parse_csv(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,sweep,sweep_value,snr_db,mean_wsr,std_error,samples,mean_iters")
    throw Error("bad CSV header");

  MetricsTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw Error("bad CSV row: " + line);
    MetricsRow row;
    row.method = fields[0];
    row.sweep = fields[1];
    try {
      row.sweep_value = std::stod(fields[2]);
      row.snr_db = std::stod(fields[3]);
      row.mean_wsr = std::stod(fields[4]);
      row.std_error = std::stod(fields[5]);
      row.samples = std::stoi(fields[6]);
      row.mean_iters = std::stod(fields[7]);
    } catch (const std::exception&) {
      throw Error("bad CSV value in row: " + line);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_plot(const MetricsTable& table, const std::string& kind) {
  if (table.rows.empty()) throw Error("cannot plot an empty table");

  // Series: method alone for the snr sweep (the x axis is SNR), otherwise one
  // per (method, snr_db).
  std::map<std::pair<std::string, double>, std::vector<std::pair<double, double>>> series;
  for (const MetricsRow& row : table.rows) {
    const double snr_key = kind == "snr" ? 0.0 : row.snr_db;
    series[{row.method, snr_key}].push_back({row.sweep_value, row.mean_wsr});
  }
  for (auto& [key, pts] : series) std::sort(pts.begin(), pts.end());

  double xmin = table.rows.front().sweep_value, xmax = xmin;
  double ymin = table.rows.front().mean_wsr, ymax = ymin;
  for (const MetricsRow& row : table.rows) {
    xmin = std::min(xmin, row.sweep_value);
    xmax = std::max(xmax, row.sweep_value);
    ymin = std::min(ymin, row.mean_wsr);
    ymax = std::max(ymax, row.mean_wsr);
  }
  auto pad = [](double lo, double hi) {
    const double range = hi - lo;
    return range > 0.0 ? 0.05 * range : std::max(0.5, std::abs(lo) * 0.05);
  };
  const double xpad = pad(xmin, xmax), ypad = pad(ymin, ymax);
  const double ax_xmin = xmin - xpad, ax_xmax = xmax + xpad;
  const double ax_ymin = ymin - ypad, ax_ymax = ymax + ypad;

  const double px0 = 60, px1 = 470, py0 = 30, py1 = 370;
  auto sx = [&](double v) { return px0 + (v - ax_xmin) / (ax_xmax - ax_xmin) * (px1 - px0); };
  auto sy = [&](double v) { return py1 - (v - ax_ymin) / (ax_ymax - ax_ymin) * (py1 - py0); };

  static const char* kPalette[] = {"#1f6fb2", "#d1495b", "#3a8f5f", "#8a5bb8",
                                   "#c98a2b", "#4aa3a3", "#7a7a7a", "#b25f9c"};
  const int palette_size = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));

  std::string x_label = "SNR (dB)";
  if (kind == "iterations") x_label = "Iterations";
  if (kind == "users") x_label = "Users per cell";

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
         "viewBox=\"0 0 640 420\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
  svg += "<rect x=\"60\" y=\"30\" width=\"410\" height=\"340\" fill=\"none\" stroke=\"#444444\"/>\n";

  for (int t = 0; t < 5; ++t) {
    const double fx = ax_xmin + (ax_xmax - ax_xmin) * t / 4.0;
    const double fy = ax_ymin + (ax_ymax - ax_ymin) * t / 4.0;
    const std::string x = fmt_px(sx(fx));
    const std::string y = fmt_px(sy(fy));
    svg += "<line x1=\"" + x + "\" y1=\"370\" x2=\"" + x + "\" y2=\"375\" stroke=\"#444444\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"388\" text-anchor=\"middle\">" + fmt4(fx) + "</text>\n";
    svg += "<line x1=\"55\" y1=\"" + y + "\" x2=\"60\" y2=\"" + y + "\" stroke=\"#444444\"/>\n";
    svg += "<text x=\"52\" y=\"" + y + "\" text-anchor=\"end\" dominant-baseline=\"middle\">" +
           fmt4(fy) + "</text>\n";
  }
  svg += "<text x=\"265\" y=\"412\" text-anchor=\"middle\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"200\" text-anchor=\"middle\" transform=\"rotate(-90 16 200)\">"
         "Weighted sum rate (bits/s/Hz)</text>\n";

  int index = 0;
  for (const auto& [key, pts] : series) {
    const std::string color = kPalette[index % palette_size];
    std::string points;
    for (const auto& [x, y] : pts) {
      if (!points.empty()) points += ' ';
      points += fmt_px(sx(x)) + "," + fmt_px(sy(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" +
           points + "\"/>\n";

    std::string label = key.first;
    if (kind != "snr") label += " @ " + fmt4(key.second) + " dB";
    const std::string ly = std::to_string(46 + 18 * index);
    svg += "<line x1=\"482\" y1=\"" + ly + "\" x2=\"500\" y2=\"" + ly + "\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"506\" y=\"" + ly + "\" dominant-baseline=\"middle\">" + label + "</text>\n";
    ++index;
  }
  svg += "</svg>\n";
  return svg;
}

void emit_plot(const MetricsTable& table, const std::string& kind, const std::string& path) {
  write_file(path, render_plot(table, kind));
}

}  // namespace cpss
