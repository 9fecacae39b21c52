#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dobc/format.hpp"
#include "dobc/synthesis.hpp"

namespace dobc {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string format_vector(const Vec& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += format_double(v(k));
  }
  return out;
}

Vec parse_vector(std::string_view s) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && s[pos] == ' ') ++pos;
    if (pos >= s.size()) break;
    std::size_t end = s.find(' ', pos);
    if (end == std::string_view::npos) end = s.size();
    vals.push_back(parse_double(s.substr(pos, end - pos)));
    pos = end;
  }
  return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

namespace {

const char* yes_no(bool b) { return b ? "true" : "false"; }

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) {
        throw std::invalid_argument("report line " + std::to_string(lineno) + " is not 'key = value'");
      }
      values_[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("report is missing key '" + key + "'");
    return it->second;
  }
  double num(const std::string& key) const { return parse_double(str(key)); }
  long long integer(const std::string& key) const { return std::stoll(str(key)); }
  bool flag(const std::string& key) const {
    const auto& v = str(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("key '" + key + "' is not a boolean");
  }
  Vec vec(const std::string& key) const { return parse_vector(str(key)); }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace

std::string to_text(const SynthesisReport& r) {
  std::ostringstream os;
  os << "# dobc synthesis report v1\n";
  os << "mu = " << format_double(r.mu) << '\n';
  os << "grid.omega_min = " << format_double(r.grid.omega_min) << '\n';
  os << "grid.omega_max = " << format_double(r.grid.omega_max) << '\n';
  os << "grid.points = " << r.grid.points << '\n';
  os << "grid.refine = " << yes_no(r.grid.refine) << '\n';
  os << "channels = " << r.channels.size() << '\n';
  for (const auto& c : r.channels) {
    const std::string k = "channel." + std::to_string(c.channel) + ".";
    os << k << "gains = " << format_vector(c.gains) << '\n';
    if (c.a1_max) os << k << "a1_max = " << format_double(*c.a1_max) << '\n';
    os << k << "nyquist.pass = " << yes_no(c.nyquist.pass) << '\n';
    os << k << "nyquist.min_distance = " << format_double(c.nyquist.min_distance) << '\n';
    os << k << "nyquist.winding_number = " << c.nyquist.winding_number << '\n';
    os << k << "nyquist.low_freq_real_limit = " << format_double(c.nyquist.low_freq_real_limit) << '\n';
    os << k << "nyquist.curve_points = " << c.nyquist.curve_points << '\n';
    os << k << "spr.pass = " << yes_no(c.spr.pass) << '\n';
    os << k << "spr.min_real = " << format_double(c.spr.min_real) << '\n';
    os << k << "spr.omega_at_min = " << format_double(c.spr.omega_at_min) << '\n';
    os << k << "spr.stable = " << yes_no(c.spr.stable) << '\n';
  }
  if (r.saturation) {
    const auto& s = *r.saturation;
    os << "saturation.Phi_level = " << format_double(s.Phi_level) << '\n';
    os << "saturation.phi_level = " << format_vector(s.phi_level) << '\n';
    os << "saturation.grid_max_w = " << format_double(s.grid_max_w) << '\n';
    os << "saturation.argmax_point = " << format_vector(s.argmax_point) << '\n';
    os << "saturation.argmax_time = " << format_double(s.argmax_time) << '\n';
    os << "saturation.lipschitz_F = " << format_double(s.lipschitz_F) << '\n';
    os << "saturation.lipschitz_estimated = " << yes_no(s.lipschitz_estimated) << '\n';
    os << "saturation.grid_size = " << s.grid_size << '\n';
    os << "saturation.grid_points = " << s.grid_points << '\n';
    os << "saturation.safety_factor = " << format_double(s.safety_factor) << '\n';
  }
  os << "pass = " << yes_no(r.pass()) << '\n';
  return os.str();
}

SynthesisReport parse_synthesis_report(const std::string& text) {
  const KeyValues kv(text);
  SynthesisReport r;
  r.mu = kv.num("mu");
  r.grid.omega_min = kv.num("grid.omega_min");
  r.grid.omega_max = kv.num("grid.omega_max");
  r.grid.points = static_cast<int>(kv.integer("grid.points"));
  r.grid.refine = kv.flag("grid.refine");
  const long long channels = kv.integer("channels");
  for (long long i = 1; i <= channels; ++i) {
    const std::string k = "channel." + std::to_string(i) + ".";
    ChannelReport c;
    c.channel = static_cast<int>(i);
    c.gains = kv.vec(k + "gains");
    if (kv.has(k + "a1_max")) c.a1_max = kv.num(k + "a1_max");
    c.nyquist.pass = kv.flag(k + "nyquist.pass");
    c.nyquist.min_distance = kv.num(k + "nyquist.min_distance");
    c.nyquist.winding_number = static_cast<int>(kv.integer(k + "nyquist.winding_number"));
    c.nyquist.low_freq_real_limit = kv.num(k + "nyquist.low_freq_real_limit");
    c.nyquist.curve_points = static_cast<std::size_t>(kv.integer(k + "nyquist.curve_points"));
    c.spr.pass = kv.flag(k + "spr.pass");
    c.spr.min_real = kv.num(k + "spr.min_real");
    c.spr.omega_at_min = kv.num(k + "spr.omega_at_min");
    c.spr.stable = kv.flag(k + "spr.stable");
    r.channels.push_back(std::move(c));
  }
  if (kv.has("saturation.Phi_level")) {
    SaturationEstimate s;
    s.Phi_level = kv.num("saturation.Phi_level");
    s.phi_level = kv.vec("saturation.phi_level");
    s.grid_max_w = kv.num("saturation.grid_max_w");
    s.argmax_point = kv.vec("saturation.argmax_point");
    s.argmax_time = kv.num("saturation.argmax_time");
    s.lipschitz_F = kv.num("saturation.lipschitz_F");
    s.lipschitz_estimated = kv.flag("saturation.lipschitz_estimated");
    s.grid_size = static_cast<std::size_t>(kv.integer("saturation.grid_size"));
    s.grid_points = static_cast<int>(kv.integer("saturation.grid_points"));
    s.safety_factor = kv.num("saturation.safety_factor");
    r.saturation = s;
  }
  if (kv.flag("pass") != r.pass()) throw std::invalid_argument("report pass flag is inconsistent");
  return r;
}

}  // namespace dobc
