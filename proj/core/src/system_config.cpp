#include "spintorus/system_config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace spintorus {

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw std::invalid_argument("unknown key '" + item.key() + "' in " + where);
  }
}

double positive(const nlohmann::json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
  const double v = obj.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(key) + " must be positive");
  return v;
}

}  // namespace

FieldConfig SystemConfig::field() const {
  if (kind == "coulomb") return coulomb_field(units);
  if (kind == "harmonic") return harmonic_field(stiffness, units);
  if (kind == "custom-polynomial") return polynomial_field(coefficients, units);
  throw std::invalid_argument("unknown potential kind '" + kind + "'");
}

nlohmann::json SystemConfig::canonical() const {
  nlohmann::json pot{{"kind", kind}};
  if (kind == "harmonic") pot["stiffness"] = stiffness;
  if (kind == "custom-polynomial") {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : coefficients) c[std::to_string(k)] = v;
    pot["coefficients"] = c;
  }
  return {{"potential", pot},
          {"coupling", coupling},
          {"units",
           {{"mass", units.mass}, {"light_speed", units.light_speed}, {"hbar", units.hbar}, {"charge", units.charge}}}};
}

SystemConfig parse_system_config(const nlohmann::json& j) {
  reject_unknown(j, {"potential", "coupling", "units"}, "system config");
  SystemConfig cfg;
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    reject_unknown(p, {"kind", "stiffness", "coefficients"}, "potential");
    if (p.contains("kind")) cfg.kind = p.at("kind").get<std::string>();
    if (cfg.kind != "coulomb" && cfg.kind != "harmonic" && cfg.kind != "custom-polynomial") {
      throw std::invalid_argument("unknown potential kind '" + cfg.kind + "'");
    }
    cfg.stiffness = positive(p, "stiffness", cfg.stiffness);
    if (p.contains("coefficients")) {
      const auto& c = p.at("coefficients");
      if (!c.is_object()) throw std::invalid_argument("coefficients must map powers to numbers");
      for (const auto& item : c.items()) {
        std::size_t used = 0;
        int power = 0;
        try {
          power = std::stoi(item.key(), &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != item.key().size()) {
          throw std::invalid_argument("coefficient key '" + item.key() + "' is not an integer power");
        }
        if (!item.value().is_number()) throw std::invalid_argument("coefficient values must be numbers");
        cfg.coefficients[power] = item.value().get<double>();
      }
    }
  }
  cfg.coupling = positive(j, "coupling", kFineStructure);
  Units u;
  bool explicit_charge = false;
  if (j.contains("units")) {
    const auto& uj = j.at("units");
    reject_unknown(uj, {"mass", "light_speed", "hbar", "charge"}, "units");
    u.mass = positive(uj, "mass", 1.0);
    u.light_speed = positive(uj, "light_speed", 1.0);
    u.hbar = positive(uj, "hbar", 1.0);
    if (uj.contains("charge")) {
      u.charge = positive(uj, "charge", 1.0);
      explicit_charge = true;
    }
  }
  if (explicit_charge) {
    const double implied = u.coupling();
    if (j.contains("coupling") && std::abs(implied - cfg.coupling) > 1e-12 * cfg.coupling) {
      throw std::invalid_argument("charge and coupling disagree");
    }
    cfg.coupling = implied;
  } else {
    u.charge = std::sqrt(cfg.coupling * u.hbar * u.light_speed);
  }
  cfg.units = u;
  return cfg;
}

SystemConfig load_system_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument("malformed config file " + path.string() + ": " + ex.what());
  }
  return parse_system_config(j);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spintorus
