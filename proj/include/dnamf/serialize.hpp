#pragma once

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dnamf/dataset.hpp"
#include "dnamf/dna_fit.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/nonnested_sem.hpp"

namespace dnamf {

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json hyper_to_json(const NonsepHyper& h) {
  return {{"theta_x", vector_to_json(h.theta_x)},
          {"theta_y", h.theta_y},
          {"theta_t", h.theta_t},
          {"beta", h.beta},
          {"delta", h.delta}};
}

inline NonsepHyper hyper_from_json(const nlohmann::json& j) {
  NonsepHyper h;
  h.theta_x = vector_from_json(j.at("theta_x"));
  h.theta_y = j.at("theta_y").get<double>();
  h.theta_t = j.at("theta_t").get<double>();
  h.beta = j.at("beta").get<double>();
  h.delta = j.at("delta").get<double>();
  return h;
}

inline nlohmann::json sem_to_json(const SemState& s) {
  nlohmann::json j;
  j["iterations"] = s.iterations;
  j["burn_in"] = s.burn_in;
  j["observed"] = to_json(s.observed);
  auto levels = nlohmann::json::array();
  for (std::size_t l = 0; l < s.design.size(); ++l)
    levels.push_back({{"t", s.design[l].t},
                      {"X", matrix_to_json(s.design[l].X)},
                      {"source", s.design[l].source},
                      {"y", vector_to_json(s.y[l])}});
  j["levels"] = std::move(levels);
  return j;
}

inline SemState sem_from_json(const nlohmann::json& j) {
  SemState s;
  s.iterations = j.at("iterations").get<int>();
  s.burn_in = j.at("burn_in").get<int>();
  s.observed = data_from_json(j.at("observed"));
  for (const auto& l : j.at("levels")) {
    PseudoLevel pl;
    pl.t = l.at("t").get<double>();
    pl.X = matrix_from_json(l.at("X"), s.observed.dim());
    pl.source = l.at("source").get<std::vector<int>>();
    s.design.push_back(std::move(pl));
    s.y.push_back(vector_from_json(l.at("y")));
  }
  return s;
}

inline nlohmann::json model_to_json(const DnaModel& m, const SemState* sem = nullptr) {
  nlohmann::json j;
  j["format"] = "dnamf-model";
  j["version"] = 1;
  j["kind"] = to_string(m.kind);
  j["level1"] = {{"alpha", m.level1.alpha},
                 {"tau2", m.level1.tau2},
                 {"theta", vector_to_json(m.level1.hyper.theta)}};
  j["alpha"] = m.alpha;
  j["tau2"] = m.tau2;
  j["hyper"] = hyper_to_json(m.hyper);
  j["objective"] = m.objective;
  j["data"] = to_json(m.data);
  if (sem && !sem->trivial()) j["sem"] = sem_to_json(*sem);
  return j;
}

struct LoadedModel {
  DnaModel model;
  std::optional<SemState> sem;
};

inline LoadedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "dnamf-model") throw ConfigError("not a model file");
    const KernelKind kind = parse_kernel_kind(j.at("kind").get<std::string>());
    const MultiFidelityData data = data_from_json(j.at("data"));
    const auto& l1 = j.at("level1");
    Level1Model level1 =
        make_level1(data.level(0).X, data.level(0).y, Level1Hyper{vector_from_json(l1.at("theta"))},
                    l1.at("alpha").get<double>(), l1.at("tau2").get<double>());
    LoadedModel out;
    out.model = make_dna_model(data, kind, std::move(level1), hyper_from_json(j.at("hyper")),
                               j.at("alpha").get<double>(), j.at("tau2").get<double>());
    const double stored = j.at("objective").get<double>();
    if (std::abs(out.model.objective - stored) > 1e-8 * std::max(1.0, std::abs(stored)))
      throw ConfigError("model checksum mismatch: stored objective " + format_double(stored) +
                        ", recomputed " + format_double(out.model.objective));
    if (j.contains("sem")) out.sem = sem_from_json(j.at("sem"));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace dnamf
