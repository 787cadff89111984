#include "skylab/family_parse.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skylab {

namespace {

std::map<std::string, std::string> split_params(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("family parameter missing '=': " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double take_double(std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("family needs parameter '" + key + "'");
  const double v = std::stod(it->second);
  kv.erase(it);
  return v;
}

int take_int(std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("family needs parameter '" + key + "'");
  const int v = std::stoi(it->second);
  kv.erase(it);
  return v;
}

Complex take_complex(std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("family needs parameter '" + key + "'");
  const Complex v = parse_complex(it->second);
  kv.erase(it);
  return v;
}

void reject_leftovers(const std::map<std::string, std::string>& kv, const std::string& family) {
  if (!kv.empty())
    throw std::invalid_argument("unknown parameter '" + kv.begin()->first + "' for family " +
                                family);
}

}  // namespace

Complex parse_complex(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty complex literal");
  std::string s = text;
  // pure real
  if (s.back() != 'i' && s.back() != 'I') {
    std::size_t used = 0;
    const double re = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("bad complex literal: " + text);
    return {re, 0.0};
  }
  s.pop_back();  // drop the 'i'
  // split at the last '+'/'-' that is not an exponent sign and not leading
  std::size_t split = std::string::npos;
  for (std::size_t q = s.size(); q-- > 1;) {
    if ((s[q] == '+' || s[q] == '-') && s[q - 1] != 'e' && s[q - 1] != 'E') {
      split = q;
      break;
    }
  }
  if (split == std::string::npos) {  // pure imaginary, e.g. "0.1i" or "-2i"
    if (s.empty() || s == "+") return {0.0, 1.0};
    if (s == "-") return {0.0, -1.0};
    return {0.0, std::stod(s)};
  }
  const double re = std::stod(s.substr(0, split));
  std::string imag_part = s.substr(split);
  if (imag_part == "+") imag_part = "1";
  else if (imag_part == "-") imag_part = "-1";
  return {re, std::stod(imag_part)};
}

MapPtr parse_family(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string family = text.substr(0, colon);
  auto kv = colon == std::string::npos ? std::map<std::string, std::string>{}
                                       : split_params(text.substr(colon + 1));
  MapPtr map;
  if (family == "homogeneous") {
    map = homogeneous();
  } else if (family == "skyrmion") {
    map = skyrmion(take_double(kv, "r"));
  } else if (family == "anti_skyrmion" || family == "anti") {
    map = anti_skyrmion(take_double(kv, "r"));
  } else if (family == "cutoff_skyrmion" || family == "cutoff") {
    const double r = take_double(kv, "r");
    map = cutoff_skyrmion(r, take_double(kv, "R"));
  } else if (family == "cutoff_anti") {
    const double r = take_double(kv, "r");
    map = cutoff_anti_skyrmion(r, take_double(kv, "R"));
  } else if (family == "multi_vortex") {
    const double r = take_double(kv, "r");
    const double R = take_double(kv, "R");
    map = multi_vortex(r, R, take_int(kv, "k"));
  } else if (family == "stretched") {
    const double r = take_double(kv, "r");
    const double L = take_double(kv, "L");
    map = stretched(r, L, take_int(kv, "k"));
  } else if (family == "equivariant") {
    const double r = take_double(kv, "r");
    const int m = take_int(kv, "m");
    const double psi0 = take_double(kv, "psi0");
    map = equivariant([r](double rho) { return skyrmion_theta(rho, r); }, m, psi0, 40.0 * r);
  } else if (family == "distorted") {
    map = distorted(take_complex(kv, "a"));
  } else if (family == "meromorphic") {
    const int k = take_int(kv, "k");
    map = meromorphic(k, take_complex(kv, "a"));
  } else if (family == "perturbed" || family == "perturbed_homogeneous") {
    const double lambda = take_double(kv, "lambda");
    map = perturbed_homogeneous(lambda, take_double(kv, "t"));
  } else {
    throw std::invalid_argument("unknown family '" + family + "'");
  }
  reject_leftovers(kv, family);
  return map;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string{};
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

}  // namespace skylab
