#pragma once

// JSON views of the computed reports. Non-finite numbers are written as null.

#include <optional>

#include <json.hpp>

#include "lossmetro/bures.hpp"
#include "lossmetro/estimation.hpp"
#include "lossmetro/metrology.hpp"

namespace lossmetro {

nlohmann::json number_json(double x);
nlohmann::json vector_json(const RealVector& v);
nlohmann::json vector_json(const std::vector<double>& v);
nlohmann::json matrix_json(const RealMatrix& m);

nlohmann::json to_json(const QfimReport& report);
nlohmann::json to_json(const SimReport& report, bool include_counts = false);

struct EcbReport {
  EcbQuery query;
  double mu = 1.0;
  double closed_form = 1.0;
  BruteForceResult oracle;
  double distance = 0.0;
  std::optional<double> pipeline;  // optimal probe pushed through both channels
};

EcbReport ecb_report(const EcbQuery& query, bool with_pipeline, const Tolerances& tol = {});
nlohmann::json to_json(const EcbReport& report);

}  // namespace lossmetro
