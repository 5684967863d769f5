#include "dyadflow/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dyadflow {

namespace {

constexpr int kExpectedBeats = 20;

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw Error("parse-error", context + ": not a number: '" + s + "'");
  }
  if (pos != t.size()) throw Error("parse-error", context + ": trailing characters in '" + s + "'");
  if (!std::isfinite(v)) throw Error("parse-error", context + ": non-finite value '" + s + "'");
  return v;
}

std::vector<std::pair<std::string, std::string>> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("not-found", "cannot open " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error("parse-error", path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

// ------------------------------------------------------------- trial CSV

void write_trial_csv(const std::string& path, const TrialRecord& t) {
  const size_t n = t.s1.samples.size();
  if (t.s2.samples.size() != n || t.position.samples.size() != n) {
    throw Error("channel-mismatch", "trial channels must share one length");
  }
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << "t_s,s1_n,s2_n,pos_m,beat\n";
  // Beat impulses land on the nearest sample.
  std::vector<char> beat(n, 0);
  for (double tb : t.beats) {
    const long idx = std::lround(tb * t.s1.fs);
    if (idx >= 0 && static_cast<size_t>(idx) < n) beat[static_cast<size_t>(idx)] = 1;
  }
  for (size_t i = 0; i < n; ++i) {
    out << format_double(static_cast<double>(i) / t.s1.fs) << ',' << format_double(t.s1.samples[i])
        << ',' << format_double(t.s2.samples[i]) << ',' << format_double(t.position.samples[i])
        << ',' << (beat[i] ? '1' : '0') << '\n';
  }
}

TrialRecord read_trial_csv(const std::string& path, double expected_fs_hz) {
  std::ifstream in(path);
  if (!in) throw Error("not-found", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t_s,s1_n,s2_n,pos_m,beat") {
    throw Error("parse-error", path + ":1: expected header t_s,s1_n,s2_n,pos_m,beat");
  }
  TrialRecord t;
  t.s1.fs = t.s2.fs = t.position.fs = expected_fs_hz;
  t.s1.label = "s1";
  t.s2.label = "s2";
  t.position.label = "pos";
  int lineno = 1;
  const char* colnames[5] = {"t_s", "s1_n", "s2_n", "pos_m", "beat"};
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != 5) {
      throw Error("parse-error",
                  path + ":" + std::to_string(lineno) + ": expected 5 columns, got " +
                      std::to_string(cells.size()));
    }
    double vals[5];
    for (int c = 0; c < 5; ++c) {
      vals[c] = parse_double(cells[static_cast<size_t>(c)], path + ":" + std::to_string(lineno) +
                                                                ": column " + colnames[c]);
    }
    const size_t i = t.s1.samples.size();
    const double expected_t = static_cast<double>(i) / expected_fs_hz;
    if (std::abs(vals[0] - expected_t) > 0.5 / expected_fs_hz) {
      throw Error("config-error", path + ":" + std::to_string(lineno) +
                                      ": t_s does not match the manifest sampling rate " +
                                      format_double(expected_fs_hz));
    }
    t.s1.samples.push_back(vals[1]);
    t.s2.samples.push_back(vals[2]);
    t.position.samples.push_back(vals[3]);
    if (vals[4] != 0.0) {
      if (vals[4] != 1.0) {
        throw Error("parse-error",
                    path + ":" + std::to_string(lineno) + ": beat column must be 0 or 1");
      }
      t.beats.push_back(expected_t);
    }
  }
  if (t.s1.samples.empty()) throw Error("parse-error", path + ": no data rows");
  validate_channel(t.s1);
  validate_channel(t.s2);
  validate_channel(t.position);
  return t;
}

// -------------------------------------------------------- session manifest

SessionManifest read_session_manifest(const std::string& path) {
  SessionManifest m;
  std::map<std::string, SessionManifest::TrialEntry> trials;
  std::map<std::string, DyadConfig> dyads;
  std::vector<std::string> trial_order, dyad_order;
  for (const auto& [key, value] : read_kv_file(path)) {
    if (key == "fs_hz") {
      m.fs_hz = parse_double(value, path + ": fs_hz");
      continue;
    }
    std::istringstream ks(key);
    std::string head, id, field;
    std::getline(ks, head, '.');
    std::getline(ks, id, '.');
    std::getline(ks, field);
    if (head == "dyad" && !id.empty() && !field.empty()) {
      if (!dyads.count(id)) {
        dyad_order.push_back(id);
        dyads[id].dyad_id = id;
      }
      DyadConfig& d = dyads[id];
      if (field == "m1_kg") {
        d.masses.m1 = parse_double(value, path + ": " + key);
      } else if (field == "m2_kg") {
        d.masses.m2 = parse_double(value, path + ": " + key);
      } else if (field == "M_kg") {
        d.masses.M = parse_double(value, path + ": " + key);
      } else if (field == "role_a") {
        d.role_a = value;
      } else if (field == "role_b") {
        d.role_b = value;
      } else if (field == "body_mass_a_kg") {
        d.body_mass_a_kg = parse_double(value, path + ": " + key);
      } else if (field == "body_mass_b_kg") {
        d.body_mass_b_kg = parse_double(value, path + ": " + key);
      } else if (field == "sex_a") {
        d.sex_a = value;
      } else if (field == "sex_b") {
        d.sex_b = value;
      } else {
        throw Error("parse-error", path + ": unknown dyad field '" + key + "'");
      }
    } else if (head == "trial" && !id.empty() && !field.empty()) {
      if (!trials.count(id)) {
        trial_order.push_back(id);
        trials[id].trial_id = id;
      }
      SessionManifest::TrialEntry& e = trials[id];
      if (field == "dyad") {
        e.dyad_id = value;
      } else if (field == "file") {
        e.file = value;
      } else if (field == "target_distance_m") {
        e.target_distance_m = parse_double(value, path + ": " + key);
      } else if (field == "metronome_period_s") {
        e.metronome_period_s = parse_double(value, path + ": " + key);
      } else {
        throw Error("parse-error", path + ": unknown trial field '" + key + "'");
      }
    } else {
      throw Error("parse-error", path + ": unknown key '" + key + "'");
    }
  }
  if (m.fs_hz <= 0.0) throw Error("config-error", path + ": missing or invalid fs_hz");
  for (const auto& id : dyad_order) {
    const DyadConfig& d = dyads[id];
    if (d.masses.M <= 0.0) {
      throw Error("config-error", path + ": dyad " + id + " needs positive M_kg");
    }
    // Arm masses come either explicitly or as body mass + sex for the
    // anthropometric-table route.
    const bool a_ok = d.masses.m1 > 0.0 || (d.body_mass_a_kg > 0.0 && !d.sex_a.empty());
    const bool b_ok = d.masses.m2 > 0.0 || (d.body_mass_b_kg > 0.0 && !d.sex_b.empty());
    if (!a_ok || !b_ok) {
      throw Error("config-error", path + ": dyad " + id +
                                      " needs m1_kg/m2_kg or body_mass_*_kg plus sex_*");
    }
    m.dyads.push_back(d);
  }
  for (const auto& id : trial_order) {
    const SessionManifest::TrialEntry& e = trials[id];
    if (e.dyad_id.empty() || e.file.empty()) {
      throw Error("config-error", path + ": trial " + id + " needs dyad and file");
    }
    m.trials.push_back(e);
  }
  return m;
}

void write_session_manifest(const std::string& path, const SessionManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << "fs_hz = " << format_double(m.fs_hz) << "\n";
  for (const auto& d : m.dyads) {
    if (d.masses.m1 > 0.0) {
      out << "dyad." << d.dyad_id << ".m1_kg = " << format_double(d.masses.m1) << "\n";
    } else {
      out << "dyad." << d.dyad_id << ".body_mass_a_kg = " << format_double(d.body_mass_a_kg)
          << "\n";
      out << "dyad." << d.dyad_id << ".sex_a = " << d.sex_a << "\n";
    }
    if (d.masses.m2 > 0.0) {
      out << "dyad." << d.dyad_id << ".m2_kg = " << format_double(d.masses.m2) << "\n";
    } else {
      out << "dyad." << d.dyad_id << ".body_mass_b_kg = " << format_double(d.body_mass_b_kg)
          << "\n";
      out << "dyad." << d.dyad_id << ".sex_b = " << d.sex_b << "\n";
    }
    out << "dyad." << d.dyad_id << ".M_kg = " << format_double(d.masses.M) << "\n";
    if (!d.role_a.empty()) out << "dyad." << d.dyad_id << ".role_a = " << d.role_a << "\n";
    if (!d.role_b.empty()) out << "dyad." << d.dyad_id << ".role_b = " << d.role_b << "\n";
  }
  for (const auto& t : m.trials) {
    out << "trial." << t.trial_id << ".dyad = " << t.dyad_id << "\n";
    out << "trial." << t.trial_id << ".file = " << t.file << "\n";
    out << "trial." << t.trial_id
        << ".target_distance_m = " << format_double(t.target_distance_m) << "\n";
    out << "trial." << t.trial_id
        << ".metronome_period_s = " << format_double(t.metronome_period_s) << "\n";
  }
}

std::vector<TrialRecord> load_session(const std::string& manifest_path) {
  const SessionManifest m = read_session_manifest(manifest_path);
  const std::filesystem::path dir = std::filesystem::path(manifest_path).parent_path();
  std::map<std::string, const DyadConfig*> dyads;
  for (const auto& d : m.dyads) dyads[d.dyad_id] = &d;
  std::vector<TrialRecord> out;
  for (const auto& e : m.trials) {
    const auto it = dyads.find(e.dyad_id);
    if (it == dyads.end()) {
      throw Error("config-error",
                  "trial " + e.trial_id + " references unknown dyad " + e.dyad_id);
    }
    TrialRecord t = read_trial_csv((dir / e.file).string(), m.fs_hz);
    t.trial_id = e.trial_id;
    t.dyad_id = e.dyad_id;
    t.condition.target_distance_m = e.target_distance_m;
    t.condition.metronome_period_s = e.metronome_period_s;
    t.condition.role_a = it->second->role_a;
    t.condition.role_b = it->second->role_b;
    if (static_cast<int>(t.beats.size()) != kExpectedBeats) {
      std::fprintf(stderr, "warning: trial %s has %zu beats (expected %d), retained\n",
                   e.trial_id.c_str(), t.beats.size(), kExpectedBeats);
    }
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------- threshold CSV

void write_threshold_csv(const std::string& path, const ThresholdCurve& t) {
  std::ofstream out(path);
  if (!out) throw Error("not-found", "cannot write " + path);
  out << "freq_hz,q99,n_perm,seed\n";
  for (size_t i = 0; i < t.freqs.size(); ++i) {
    out << format_double(t.freqs[i]) << ',' << format_double(t.q99[i]) << ',' << t.n_perm << ','
        << t.seed << '\n';
  }
}

ThresholdCurve read_threshold_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("not-found", "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "freq_hz,q99,n_perm,seed") {
    throw Error("parse-error", path + ":1: expected header freq_hz,q99,n_perm,seed");
  }
  ThresholdCurve t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    if (cells.size() != 4) {
      throw Error("parse-error", path + ":" + std::to_string(lineno) + ": expected 4 columns");
    }
    const std::string ctx = path + ":" + std::to_string(lineno);
    t.freqs.push_back(parse_double(cells[0], ctx + ": freq_hz"));
    t.q99.push_back(parse_double(cells[1], ctx + ": q99"));
    t.n_perm = static_cast<int>(parse_double(cells[2], ctx + ": n_perm"));
    try {
      t.seed = std::stoull(trim(cells[3]));
    } catch (const std::exception&) {
      throw Error("parse-error", ctx + ": seed must be an unsigned integer");
    }
  }
  if (t.freqs.empty()) throw Error("parse-error", path + ": no data rows");
  return t;
}

// ------------------------------------------------------------------ hashes

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("not-found", "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a64(ss.str());
}

}  // namespace dyadflow
