#pragma once

#include <nlohmann/json.hpp>

#include "preassess/dtree.hpp"
#include "preassess/probability.hpp"
#include "preassess/session.hpp"

namespace preassess {

using Json = nlohmann::ordered_json;

/// {"exact": "2/3", "decimal": "0.66666666666666667", "value": 0.666...}
Json rational_json(const Rational& r);

Json recommendation_json(const Recommendation& r);
Json session_json(const AssessmentSession& s);
Json posterior_json(const PosteriorTable& table);
Json weight_row_json(const WeightTableRow& row);
Json confusion_json(const ConfusionMatrix& m);

}  // namespace preassess
