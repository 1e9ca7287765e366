#ifndef GEOCONNECT_SCENARIO_HPP
#define GEOCONNECT_SCENARIO_HPP

// Scenario files: JSON documents describing a model (split metric, product
// model, or a builtin), endpoints, and solver configuration overrides.
// Validation collects every problem before failing so a bad file reports
// all of its errors at once.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoconnect/connect.hpp"
#include "geoconnect/gpw.hpp"

namespace geoconnect {

struct Scenario {
  std::string name;
  std::string kind;  // "split", "gpw", or "builtin"
  std::optional<MetricModel> model;
  std::optional<GpwModel> gpw;
  EndpointPair endpoints;      // split/builtin
  GpwPoint gpw_p, gpw_q;       // gpw
  ConnectConfig config;
};

namespace detail {

inline Vec to_vec(const nlohmann::json& a) {
  Vec v;
  for (const auto& e : a) v.push_back(e.get<double>());
  return v;
}

}  // namespace detail

inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open scenario file '" + file + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("scenario '" + file + "' is not valid JSON: " + e.what());
  }

  Scenario sc;
  std::vector<std::string> errors;
  auto fail = [&](const std::string& msg) { errors.push_back(msg); };

  sc.name = doc.value("name", file);
  sc.kind = doc.value("kind", "");
  if (sc.kind != "split" && sc.kind != "gpw" && sc.kind != "builtin")
    fail("field 'kind' must be one of split, gpw, builtin");

  // solver configuration with range checks
  if (doc.contains("config")) {
    const auto& c = doc["config"];
    auto geti = [&](const char* key, int def, int lo, int hi) {
      const int v = c.value(key, def);
      if (v < lo || v > hi)
        fail(std::string("config.") + key + " out of range [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "]");
      return v;
    };
    auto getd = [&](const char* key, double def) {
      const double v = c.value(key, def);
      if (!(v > 0.0)) fail(std::string("config.") + key + " must be positive");
      return v;
    };
    sc.config.nodes = geti("nodes", sc.config.nodes, 16, 4096);
    sc.config.n_start = geti("n_start", static_cast<int>(sc.config.n_start), 1, 1 << 20);
    sc.config.k_max = geti("k_max", sc.config.k_max, 0, 30);
    sc.config.grid = geti("grid", sc.config.grid, 8, 16384);
    sc.config.max_iter = geti("max_iter", sc.config.max_iter, 1, 1000000);
    sc.config.multistart = geti("multistart", sc.config.multistart, 1, 64);
    sc.config.tol_grad = getd("tol_grad", sc.config.tol_grad);
    sc.config.tol_lim = getd("tol_lim", sc.config.tol_lim);
    sc.config.tol_bvp = getd("tol_bvp", sc.config.tol_bvp);
    sc.config.h_ode = getd("h_ode", sc.config.h_ode);
    sc.config.seed = c.value("seed", sc.config.seed);
  }

  std::vector<Box> excluded;
  if (doc.contains("excluded")) {
    for (const auto& b : doc["excluded"]) {
      if (!b.contains("lo") || !b.contains("hi")) {
        fail("excluded region needs 'lo' and 'hi' arrays");
        continue;
      }
      excluded.push_back(Box{detail::to_vec(b["lo"]), detail::to_vec(b["hi"])});
    }
  }

  if (sc.kind == "builtin") {
    const std::string name = doc.value("builtin", "");
    try {
      sc.model = MetricModel::builtin(name);
    } catch (const Error& e) {
      fail(e.what());
    }
  } else if (sc.kind == "split") {
    const int d = doc.value("dimension", 0);
    if (d < 1 || d > 8) fail("field 'dimension' must be in [1, 8]");
    std::vector<std::string> metric;
    if (doc.contains("metric"))
      for (const auto& e : doc["metric"]) metric.push_back(e.get<std::string>());
    const std::string delta = doc.value("delta", "");
    const std::string beta = doc.value("beta", "0");
    if (delta.empty()) fail("split scenarios need a 'delta' expression");
    if (errors.empty()) {
      try {
        sc.model = MetricModel::make(d, metric, delta, beta, excluded,
                                     doc.value("lightlike", beta == "0"));
      } catch (const Error& e) {
        fail(std::string("model: ") + e.what());
      }
    }
  } else if (sc.kind == "gpw") {
    const int d = doc.value("dimension", 0);
    if (d < 1 || d > 8) fail("field 'dimension' must be in [1, 8]");
    std::vector<std::string> metric;
    if (doc.contains("metric"))
      for (const auto& e : doc["metric"]) metric.push_back(e.get<std::string>());
    const std::string profile = doc.value("H", "");
    if (profile.empty()) fail("gpw scenarios need a profile expression 'H'");
    if (errors.empty()) {
      try {
        std::string zeros = d == 1 ? std::string("0") : "vec(0";
        for (int i = 1; i < d && d > 1; ++i) zeros += ", 0";
        if (d > 1) zeros += ")";
        sc.gpw = GpwModel(MetricModel::make(d, metric, zeros, "0"), profile);
      } catch (const Error& e) {
        fail(std::string("model: ") + e.what());
      }
    }
  }

  // endpoints
  if (!doc.contains("endpoints") || !doc["endpoints"].contains("p") ||
      !doc["endpoints"].contains("q")) {
    fail("missing 'endpoints' with 'p' and 'q'");
  } else {
    const auto& p = doc["endpoints"]["p"];
    const auto& q = doc["endpoints"]["q"];
    if (sc.kind == "gpw") {
      try {
        sc.gpw_p = {detail::to_vec(p.at("x")), p.value("u", 0.0), p.value("v", 0.0)};
        sc.gpw_q = {detail::to_vec(q.at("x")), q.value("u", 0.0), q.value("v", 0.0)};
      } catch (const nlohmann::json::exception&) {
        fail("gpw endpoints need 'x' arrays (and optional u, v)");
      }
    } else {
      try {
        sc.endpoints.xp = detail::to_vec(p.at("x"));
        sc.endpoints.xq = detail::to_vec(q.at("x"));
        sc.endpoints.tp = p.value("t", 0.0);
        sc.endpoints.tq = q.value("t", 0.0);
      } catch (const nlohmann::json::exception&) {
        fail("endpoints need 'x' arrays (and optional t)");
      }
    }
  }

  // final cross-checks
  if (errors.empty() && sc.model) {
    const int d = sc.model->dimension();
    if (static_cast<int>(sc.endpoints.xp.size()) != d ||
        static_cast<int>(sc.endpoints.xq.size()) != d)
      fail("endpoint dimension does not match the model dimension");
    else {
      if (!sc.model->in_domain(sc.endpoints.xp)) fail("endpoint p lies in an excluded region");
      if (!sc.model->in_domain(sc.endpoints.xq)) fail("endpoint q lies in an excluded region");
    }
  }
  if (errors.empty() && sc.gpw) {
    const int d = sc.gpw->dimension();
    if (static_cast<int>(sc.gpw_p.x.size()) != d || static_cast<int>(sc.gpw_q.x.size()) != d)
      fail("endpoint dimension does not match the model dimension");
  }

  if (!errors.empty()) {
    std::string joined = "invalid scenario '" + file + "':";
    for (const auto& e : errors) joined += "\n  - " + e;
    throw Error(joined);
  }
  return sc;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_SCENARIO_HPP
