#include "hbtrain/experiment.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "hbtrain/errors.hpp"
#include "hbtrain/selfcheck.hpp"

namespace hbtrain {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + v + "'", key, line);
  }
}

long long parse_int(const std::string& v, const std::string& key, int line) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + v + "'", key, line);
  }
}

// Accepts "0.8", "-0.5", or "a+bi" / "a-bi" forms.
std::complex<double> parse_complex(const std::string& v,
                                   const std::string& key, int line) {
  const std::size_t ipos = v.find_first_of("ij");
  if (ipos == std::string::npos) return parse_double(v, key, line);
  if (ipos != v.size() - 1)
    throw ParseError("expected 'a+bi' form, got '" + v + "'", key, line);
  std::string body = v.substr(0, v.size() - 1);
  // Find the sign separating real and imaginary parts (skip a leading sign
  // and exponent signs).
  std::size_t split = std::string::npos;
  for (std::size_t k = 1; k < body.size(); ++k) {
    if ((body[k] == '+' || body[k] == '-') &&
        body[k - 1] != 'e' && body[k - 1] != 'E')
      split = k;
  }
  if (split == std::string::npos)
    throw ParseError("expected 'a+bi' form, got '" + v + "'", key, line);
  const double re = parse_double(trim(body.substr(0, split)), key, line);
  std::string imtext = trim(body.substr(split));
  if (imtext == "+" || imtext == "-") imtext += "1";
  const double im = parse_double(imtext, key, line);
  return {re, im};
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError("expected a boolean, got '" + v + "'", key, line);
}

void format_float(std::string& out, double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  out += buf;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  ExperimentSpec spec;
  bool q_given = false;
  bool schemes_given = false;

  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("unterminated section header", line, line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "system" && section != "sweep" && section != "output")
        throw ParseError("unknown section '" + section + "'", section,
                         line_no);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected 'key = value'", line, line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("expected 'key = value'", key, line_no);

    if (section == "system") {
      SystemConfig& c = spec.base;
      if (key == "n_tx") c.n_tx = static_cast<int>(parse_int(value, key, line_no));
      else if (key == "n_rx") c.n_rx = static_cast<int>(parse_int(value, key, line_no));
      else if (key == "n_rf") c.n_rf = static_cast<int>(parse_int(value, key, line_no));
      else if (key == "q_slots") { c.q_slots = static_cast<int>(parse_int(value, key, line_no)); q_given = true; }
      else if (key == "energy_budget") c.energy_budget = parse_double(value, key, line_no);
      else if (key == "noise_var") c.noise_var = parse_double(value, key, line_no);
      else if (key == "rho") c.rho = parse_complex(value, key, line_no);
      else if (key == "n_streams") c.n_streams = static_cast<int>(parse_int(value, key, line_no));
      else if (key == "bandwidth_hz") c.bandwidth_hz = parse_double(value, key, line_no);
      else if (key == "velocity_mps") c.velocity_mps = parse_double(value, key, line_no);
      else if (key == "carrier_hz") c.carrier_hz = parse_double(value, key, line_no);
      else if (key == "tol") c.tol = parse_double(value, key, line_no);
      else if (key == "altmin_max_iter") c.altmin_max_iter = static_cast<int>(parse_int(value, key, line_no));
      else if (key == "altmin_tol") c.altmin_tol = parse_double(value, key, line_no);
      else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(value, key, line_no));
      else if (key == "matched_noise") c.matched_noise = parse_bool(value, key, line_no);
      else if (key == "perfect_csi_zero_training") c.perfect_csi_zero_training = parse_bool(value, key, line_no);
      else throw ParseError("unknown key", key, line_no);
    } else if (section == "sweep") {
      if (key == "axis") {
        try {
          spec.sweep_axis = sweep_axis_from_string(value);
        } catch (const std::exception& e) {
          throw ParseError(e.what(), key, line_no);
        }
      } else if (key == "values") {
        spec.sweep_values.clear();
        for (const auto& item : split_list(value))
          spec.sweep_values.push_back(parse_double(item, key, line_no));
      } else if (key == "rho_values") {
        spec.rho_values.clear();
        for (const auto& item : split_list(value))
          spec.rho_values.push_back(parse_double(item, key, line_no));
      } else if (key == "schemes") {
        spec.schemes.clear();
        schemes_given = true;
        for (const auto& item : split_list(value)) {
          try {
            spec.schemes.push_back(scheme_from_string(item));
          } catch (const std::exception& e) {
            throw ParseError(e.what(), key, line_no);
          }
        }
      } else if (key == "trials") {
        spec.trials = static_cast<int>(parse_int(value, key, line_no));
      } else {
        throw ParseError("unknown key", key, line_no);
      }
    } else if (section == "output") {
      if (key == "path") spec.output_path = value;
      else if (key == "threads") {
        if (value == "auto") spec.threads = 0;
        else spec.threads = static_cast<int>(parse_int(value, key, line_no));
      } else {
        throw ParseError("unknown key", key, line_no);
      }
    } else {
      throw ParseError("key outside any section", key, line_no);
    }
  }

  if (!q_given) spec.base.q_slots = spec.base.max_slots();
  (void)schemes_given;
  try {
    spec.base.validate();
  } catch (const std::exception& e) {
    throw ParseError(e.what(), "system", 0);
  }
  if (spec.trials < 1)
    throw ParseError("trials must be positive", "trials", 0);
  if (spec.threads < 0)
    throw ParseError("threads must be positive or auto", "threads", 0);
  for (std::size_t i = 1; i < spec.sweep_values.size(); ++i)
    if (!(spec.sweep_values[i] > spec.sweep_values[i - 1]))
      throw ParseError("values must be strictly increasing", "values", 0);
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

std::string format_csv(const std::vector<EvaluationRecord>& records) {
  std::string out =
      "sweep_axis,sweep_value,scheme,trials,nmse_db,se_bits_per_s_per_hz,"
      "q_nz,eta,seed\n";
  for (const auto& r : records) {
    out += to_string(r.axis);
    out += ',';
    format_float(out, r.sweep_value);
    out += ',';
    out += to_string(r.scheme);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    format_float(out, 10.0 * std::log10(r.nmse));
    out += ',';
    format_float(out, r.se_bits);
    out += ',';
    out += std::to_string(r.q_nz);
    out += ',';
    format_float(out, r.eta);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

void emit_csv(const std::vector<EvaluationRecord>& records,
              const std::string& path) {
  if (records.empty()) throw InvalidParameterError("no records to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << format_csv(records);
  if (!out) throw IoError("write failed: " + path);
}

void emit_qnz_csv(const std::vector<QnzEntry>& entries,
                  const std::string& path) {
  if (entries.empty()) throw InvalidParameterError("no entries to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  std::string text = "n_rx,rho,q,q_nz,ratio\n";
  for (const auto& e : entries) {
    text += std::to_string(e.n_rx);
    text += ',';
    format_float(text, e.rho_mag);
    text += ',';
    text += std::to_string(e.q);
    text += ',';
    text += std::to_string(e.q_nz);
    text += ',';
    format_float(text, e.ratio);
    text += '\n';
  }
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

int run_experiment(const ExperimentSpec& spec) {
  const int threads = spec.threads > 0
                          ? spec.threads
                          : static_cast<int>(std::max(
                                1u, std::thread::hardware_concurrency()));
  switch (spec.command) {
    case Command::selfcheck:
      return selfcheck(std::cout, SelfcheckFault::none) ? 0 : 1;
    case Command::qnz: {
      std::vector<int> m_values;
      for (double v : spec.sweep_values)
        m_values.push_back(static_cast<int>(std::lround(v)));
      if (m_values.empty())
        throw InvalidParameterError("qnz needs sweep values (antenna counts)");
      const auto table = qnz_profile(spec.base, m_values, spec.rho_values);
      emit_qnz_csv(table, spec.output_path);
      return 0;
    }
    case Command::run: {
      // A single-point sweep at the configured budget.
      const double db =
          10.0 * std::log10(spec.base.energy_budget / spec.base.noise_var);
      const auto records = run_sweep(spec.base, SweepAxis::energy, {db},
                                     spec.schemes, spec.trials, threads);
      emit_csv(records, spec.output_path);
      return 0;
    }
    case Command::sweep: {
      if (spec.sweep_values.empty())
        throw InvalidParameterError("sweep needs values");
      const auto records =
          run_sweep(spec.base, spec.sweep_axis, spec.sweep_values,
                    spec.schemes, spec.trials, threads);
      emit_csv(records, spec.output_path);
      bool any_error = false;
      for (const auto& r : records)
        if (!r.error.empty()) {
          std::fprintf(stderr, "point %s/%s failed: %s\n",
                       to_string(r.axis).c_str(), to_string(r.scheme).c_str(),
                       r.error.c_str());
          any_error = true;
        }
      return any_error ? 3 : 0;
    }
  }
  return 1;
}

}  // namespace hbtrain
