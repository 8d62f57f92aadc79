// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The isac_beamkit Authors

#include "isac/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace isac {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

double linear_to_db(double x) { return 10.0 * std::log10(x); }

// Typed field access with messages that name the full key.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& at(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError("missing key '" + key(k) + "'");
    return j_.at(k);
  }

  double number(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number()) throw ConfigError("'" + key(k) + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("'" + key(k) + "' must be finite");
    return x;
  }
  double number(const std::string& k, double fallback) const { return has(k) ? number(k) : fallback; }

  int integer(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number_integer()) throw ConfigError("'" + key(k) + "' must be an integer");
    return v.get<int>();
  }
  int integer(const std::string& k, int fallback) const { return has(k) ? integer(k) : fallback; }

  std::uint64_t unsigned_integer(const std::string& k, std::uint64_t fallback) const {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("'" + key(k) + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& k, const std::string& fallback) const {
    if (!has(k)) return fallback;
    const json& v = at(k);
    if (!v.is_string()) throw ConfigError("'" + key(k) + "' must be a string");
    return v.get<std::string>();
  }

  Reader child(const std::string& k) const { return Reader(at(k), key(k)); }

  void only(std::initializer_list<const char*> allowed) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || it.key() == a;
      if (!ok) throw ConfigError("unknown key '" + key(it.key()) + "'");
    }
  }

  const json& raw() const { return j_; }

 private:
  std::string where() const { return path_.empty() ? "scenario" : "'" + path_ + "'"; }
  const json& j_;
  std::string path_;
};

void collect_leaves(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      collect_leaves(it.value(), p, out);
    } else {
      out.push_back(p);
    }
  }
}

json::json_pointer to_pointer(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' must have the form key=value");
  const std::string k = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::vector<std::string> leaves;
  collect_leaves(doc, "", leaves);
  std::string target;
  for (const auto& l : leaves)
    if (l == k) target = l;
  if (target.empty()) {
    std::vector<std::string> hits;
    for (const auto& l : leaves) {
      const auto dot = l.rfind('.');
      if ((dot == std::string::npos ? l : l.substr(dot + 1)) == k) hits.push_back(l);
    }
    if (hits.empty()) throw ConfigError("override key '" + k + "' is not a scenario key");
    if (hits.size() > 1) throw ConfigError("override key '" + k + "' is ambiguous; use a dotted path");
    target = hits.front();
  }
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;  // bare strings such as partially_connected
  }
  doc[to_pointer(target)] = value;
}

RxArchitecture parse_architecture(const std::string& s, const std::string& key) {
  if (s == "partially_connected") return RxArchitecture::PartiallyConnected;
  if (s == "fully_connected") return RxArchitecture::FullyConnected;
  if (s == "fully_digital") return RxArchitecture::FullyDigital;
  throw ConfigError("'" + key + "' must be partially_connected, fully_connected or fully_digital");
}

std::string architecture_name(RxArchitecture a) {
  switch (a) {
    case RxArchitecture::PartiallyConnected: return "partially_connected";
    case RxArchitecture::FullyConnected: return "fully_connected";
    case RxArchitecture::FullyDigital: return "fully_digital";
  }
  return "";
}

Scenario scenario_from_json(const json& doc) {
  const Reader r(doc, "");
  r.only({"arrays", "prior", "reflection_gamma", "power_dbm", "noise_comm_dbm", "noise_sense_dbm",
          "symbols", "rate_target_bps", "channel", "quadrature_points", "seed"});
  Scenario s;
  {
    const Reader a = r.child("arrays");
    a.only({"n_tx", "n_rx", "n_user", "n_rf_tx", "n_rf_rx", "rx_architecture"});
    s.arrays.n_tx = a.integer("n_tx");
    s.arrays.n_rx = a.integer("n_rx");
    s.arrays.n_user = a.integer("n_user");
    s.arrays.n_rf_tx = a.integer("n_rf_tx");
    s.arrays.n_rf_rx = a.integer("n_rf_rx");
    s.arrays.rx_architecture =
        parse_architecture(a.text("rx_architecture", "partially_connected"), a.key("rx_architecture"));
  }
  {
    const Reader p = r.child("prior");
    p.only({"components"});
    const json& comps = p.at("components");
    if (!comps.is_array() || comps.empty())
      throw ConfigError("'prior.components' must be a non-empty array");
    std::vector<GaussianComponent> gc;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const Reader c(comps[i], "prior.components[" + std::to_string(i) + "]");
      c.only({"weight", "mean", "variance"});
      gc.push_back({c.number("weight"), c.number("mean"), c.number("variance")});
    }
    try {
      s.angle_prior = GmmAnglePrior(std::move(gc));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("prior: ") + e.what());
    }
  }
  s.reflection.gamma = r.number("reflection_gamma");
  s.power = dbm_to_watts(r.number("power_dbm"));
  s.noise_comm = dbm_to_watts(r.number("noise_comm_dbm"));
  s.noise_sense = dbm_to_watts(r.number("noise_sense_dbm", r.number("noise_comm_dbm")));
  s.symbols = r.integer("symbols");
  s.rate_target = r.number("rate_target_bps") * std::log(2.0);
  s.quadrature_points = r.integer("quadrature_points", s.quadrature_points);
  s.seed = r.unsigned_integer("seed", s.seed);
  {
    const Reader c = r.child("channel");
    c.only({"model", "user_angle", "user_distance", "rician_factor_db", "beta0_db",
            "path_loss_exponent", "taps", "subcarriers"});
    const std::string model = c.text("model", "rician");
    if (model == "rician") {
      s.channel_spec.model = ChannelSpec::Model::Rician;
    } else if (model == "wideband") {
      s.channel_spec.model = ChannelSpec::Model::Wideband;
    } else {
      throw ConfigError("'channel.model' must be rician or wideband");
    }
    s.channel_spec.user_angle = c.number("user_angle", s.channel_spec.user_angle);
    s.channel_spec.user_distance = c.number("user_distance", s.channel_spec.user_distance);
    s.channel_spec.rician_factor = db_to_linear(c.number("rician_factor_db", linear_to_db(s.channel_spec.rician_factor)));
    s.channel_spec.beta0 = db_to_linear(c.number("beta0_db", linear_to_db(s.channel_spec.beta0)));
    s.channel_spec.path_loss_exponent = c.number("path_loss_exponent", s.channel_spec.path_loss_exponent);
    s.channel_spec.taps = c.integer("taps", s.channel_spec.taps);
    s.subcarriers = c.integer("subcarriers", 1);
    if (s.channel_spec.taps < 1) throw ConfigError("'channel.taps' must be positive");
    if (s.subcarriers < 1) throw ConfigError("'channel.subcarriers' must be positive");
    if (!(s.channel_spec.user_distance > 0.0)) throw ConfigError("'channel.user_distance' must be positive");
  }
  try {
    s.arrays.validate();
    s.channel = realize_channel(s, s.seed);
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

json matrix_to_json(const CMat& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ii.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return json{{"re", re}, {"im", im}};
}

CMat matrix_from_json(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im"))
    throw ConfigError("'" + key + "' must have re and im parts");
  const json& re = j.at("re");
  const json& im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    throw ConfigError("'" + key + "' re/im must be arrays of equal size");
  const Eigen::Index rows = static_cast<Eigen::Index>(re.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(re[0].size()) : 0;
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (re[i].size() != static_cast<std::size_t>(cols) || im[i].size() != static_cast<std::size_t>(cols))
      throw ConfigError("'" + key + "' rows have unequal length");
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = cd(re[i][j2].get<double>(), im[i][j2].get<double>());
  }
  return m;
}

}  // namespace

Scenario reference_scenario(std::uint64_t seed) {
  Scenario s;
  s.arrays = {8, 12, 6, 3, 6, RxArchitecture::PartiallyConnected};
  s.angle_prior = reference_angle_prior();
  s.reflection.gamma = 2e-12;
  s.power = dbm_to_watts(30.0);
  s.noise_comm = dbm_to_watts(-90.0);
  s.noise_sense = dbm_to_watts(-90.0);
  s.symbols = 30;
  s.rate_target = 4.5 * std::log(2.0);
  s.seed = seed;
  s.channel = realize_channel(s, seed);
  s.validate();
  return s;
}

Scenario parse_scenario(const std::string& text, const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  try {
    return scenario_from_json(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_scenario(read_file(path), overrides);
}

std::string scenario_to_json(const Scenario& s) {
  json comps = json::array();
  for (const auto& c : s.angle_prior.components())
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  json doc = {
      {"arrays",
       {{"n_tx", s.arrays.n_tx},
        {"n_rx", s.arrays.n_rx},
        {"n_user", s.arrays.n_user},
        {"n_rf_tx", s.arrays.n_rf_tx},
        {"n_rf_rx", s.arrays.n_rf_rx},
        {"rx_architecture", architecture_name(s.arrays.rx_architecture)}}},
      {"prior", {{"components", comps}}},
      {"reflection_gamma", s.reflection.gamma},
      {"power_dbm", 10.0 * std::log10(s.power) + 30.0},
      {"noise_comm_dbm", 10.0 * std::log10(s.noise_comm) + 30.0},
      {"noise_sense_dbm", 10.0 * std::log10(s.noise_sense) + 30.0},
      {"symbols", s.symbols},
      {"rate_target_bps", s.rate_target / std::log(2.0)},
      {"channel",
       {{"model", s.channel_spec.model == ChannelSpec::Model::Rician ? "rician" : "wideband"},
        {"user_angle", s.channel_spec.user_angle},
        {"user_distance", s.channel_spec.user_distance},
        {"rician_factor_db", linear_to_db(s.channel_spec.rician_factor)},
        {"beta0_db", linear_to_db(s.channel_spec.beta0)},
        {"path_loss_exponent", s.channel_spec.path_loss_exponent},
        {"taps", s.channel_spec.taps},
        {"subcarriers", s.subcarriers}}},
      {"quadrature_points", s.quadrature_points},
      {"seed", s.seed}};
  return doc.dump(2) + "\n";
}

std::string design_to_json(const HybridDesign& d) {
  json doc;
  doc["v_rf"] = d.v_rf ? matrix_to_json(*d.v_rf) : json(nullptr);
  json r = json::array();
  for (const auto& m : d.r_bb) r.push_back(matrix_to_json(m));
  doc["r_bb"] = r;
  if (const auto* p = std::get_if<PartialPhases>(&d.rx)) {
    json re = json::array(), im = json::array();
    for (Eigen::Index i = 0; i < p->d.size(); ++i) {
      re.push_back(p->d[i].real());
      im.push_back(p->d[i].imag());
    }
    doc["rx"] = {{"type", "partial"}, {"re", re}, {"im", im}};
  } else if (const auto* q = std::get_if<DftSelection>(&d.rx)) {
    doc["rx"] = {{"type", "dft"}, {"indices", q->q}};
  } else {
    doc["rx"] = {{"type", "digital"}};
  }
  return doc.dump(2) + "\n";
}

HybridDesign design_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("design is not valid JSON: ") + e.what());
  }
  try {
    HybridDesign d;
    const Reader r(doc, "design");
    r.only({"v_rf", "r_bb", "rx"});
    if (!r.at("v_rf").is_null()) d.v_rf = matrix_from_json(r.at("v_rf"), "design.v_rf");
    const json& rb = r.at("r_bb");
    if (!rb.is_array() || rb.empty()) throw ConfigError("'design.r_bb' must be a non-empty array");
    for (std::size_t k = 0; k < rb.size(); ++k)
      d.r_bb.push_back(matrix_from_json(rb[k], "design.r_bb[" + std::to_string(k) + "]"));
    const Reader rx = r.child("rx");
    const std::string type = rx.text("type", "");
    if (type == "partial") {
      const json& re = rx.at("re");
      const json& im = rx.at("im");
      if (!re.is_array() || re.size() != im.size()) throw ConfigError("'design.rx' phases malformed");
      CVec v(static_cast<Eigen::Index>(re.size()));
      for (std::size_t i = 0; i < re.size(); ++i) v[i] = cd(re[i].get<double>(), im[i].get<double>());
      d.rx = PartialPhases{v};
    } else if (type == "dft") {
      d.rx = DftSelection{rx.at("indices").get<std::vector<int>>()};
    } else if (type == "digital") {
      d.rx = DigitalReceive{};
    } else {
      throw ConfigError("'design.rx.type' must be partial, dft or digital");
    }
    return d;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("design: ") + e.what());
  }
}

HybridDesign load_design(const std::filesystem::path& path) { return design_from_json(read_file(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ExportFormat parse_export_format(const std::string& text) {
  if (text == "csv") return ExportFormat::Csv;
  if (text == "json") return ExportFormat::Json;
  throw ConfigError("format must be csv or json");
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "sweep_var,value,scheme,trial,pcrb_theta,rate_nats,rate_bits,iterations,feasible,wall_ms\n";
  for (const auto& r : rows) {
    out += r.sweep_var + "," + format_double(r.value) + "," + r.scheme + "," + std::to_string(r.trial) +
           "," + format_double(r.pcrb_theta) + "," + format_double(r.rate_nats) + "," +
           format_double(r.rate_nats / std::log(2.0)) + "," + std::to_string(r.iterations) + "," +
           (r.feasible ? "1" : "0") + "," + format_double(r.wall_ms) + "\n";
  }
  return out;
}

std::string rows_to_json(const std::vector<SweepRow>& rows) {
  // Numbers are written with the same 17-digit text as the CSV.
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto num = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("null"); };
    out += "  {\"sweep_var\": " + json(r.sweep_var).dump() + ", \"value\": " + num(r.value) +
           ", \"scheme\": " + json(r.scheme).dump() + ", \"trial\": " + std::to_string(r.trial) +
           ", \"pcrb_theta\": " + num(r.pcrb_theta) + ", \"rate_nats\": " + num(r.rate_nats) +
           ", \"rate_bits\": " + num(r.rate_nats / std::log(2.0)) +
           ", \"iterations\": " + std::to_string(r.iterations) +
           ", \"feasible\": " + (r.feasible ? "true" : "false") + ", \"wall_ms\": " + num(r.wall_ms) + "}";
    out += i + 1 < rows.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

void export_rows(const std::vector<SweepRow>& rows, const std::filesystem::path& path, ExportFormat format) {
  if (rows.empty()) throw ConfigError("nothing to export");
  write_file(path, format == ExportFormat::Csv ? rows_to_csv(rows) : rows_to_json(rows));
}

std::vector<SweepRow> rows_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "sweep_var,value,scheme,trial,pcrb_theta,rate_nats,rate_bits,iterations,feasible,wall_ms")
    throw ConfigError("unexpected CSV header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields");
    SweepRow r;
    r.sweep_var = f[0];
    r.value = std::strtod(f[1].c_str(), nullptr);
    r.scheme = f[2];
    r.trial = std::stoi(f[3]);
    r.pcrb_theta = std::strtod(f[4].c_str(), nullptr);
    r.rate_nats = std::strtod(f[5].c_str(), nullptr);
    r.iterations = std::stoi(f[7]);
    r.feasible = f[8] == "1";
    r.wall_ms = std::strtod(f[9].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

std::string pattern_to_csv(const std::vector<PatternPoint>& curve) {
  std::string out = "theta,power\n";
  for (const auto& p : curve) out += format_double(p.theta) + "," + format_double(p.power) + "\n";
  return out;
}

}  // namespace isac
