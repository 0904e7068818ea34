#include "preassess/json_io.hpp"

namespace preassess {

Json rational_json(const Rational& r) {
  Json j;
  j["exact"] = to_fraction_string(r);
  j["decimal"] = to_decimal_string(r);
  j["value"] = to_double(r);
  return j;
}

Json recommendation_json(const Recommendation& r) {
  Json j;
  if (const auto* p = std::get_if<Progress>(&r)) {
    j["kind"] = "progress";
    j["target"] = p->target ? Json(*p->target) : Json(nullptr);
    j["curriculum_complete"] = p->curriculum_complete;
    return j;
  }
  const auto& relearn = std::get<Relearn>(r);
  j["kind"] = "relearn";
  j["leaves"] = relearn.leaves;
  j["weight"] = rational_json(relearn.weight);
  j["per_parent"] = Json::array();
  for (const auto& pw : relearn.per_parent) {
    j["per_parent"].push_back({{"parent", pw.parent}, {"weight", rational_json(pw.weight)}});
  }
  return j;
}

Json session_json(const AssessmentSession& s) {
  Json j;
  j["id"] = s.id;
  j["desired"] = s.desired;
  j["mode"] = std::string(to_string(s.mode));
  j["status"] = std::string(to_string(s.status));
  j["queue"] = Json::array();
  for (const auto& q : s.queue) {
    Json item{{"parent", q.parent}, {"leaf", q.leaf}};
    if (auto it = s.outcomes.find(q.leaf); it != s.outcomes.end()) {
      item["outcome"] = std::string(to_string(it->second));
    } else {
      item["outcome"] = nullptr;
    }
    j["queue"].push_back(std::move(item));
  }
  j["performance"] = Json::object();
  for (const auto& p : s.queued_parents()) j["performance"][p] = s.performance_string(p);
  j["answered"] = s.outcomes.size();
  j["queued"] = s.queue.size();
  j["created_at"] = format_timestamp(s.created_at);
  j["updated_at"] = format_timestamp(s.updated_at);
  return j;
}

Json posterior_json(const PosteriorTable& table) {
  Json arr = Json::array();
  for (const auto& e : table) arr.push_back({{"target", e.target}, {"posterior", rational_json(e.posterior)}});
  return arr;
}

Json weight_row_json(const WeightTableRow& row) {
  Json j;
  j["n"] = row.n;
  j["pairs"] = Json::array();
  for (std::size_t i = 0; i < row.pairs.size(); ++i) {
    j["pairs"].push_back({{"j", i},
                          {"pass_weight", rational_json(row.pairs[i].pass_weight)},
                          {"fail_weight", rational_json(row.pairs[i].fail_weight)}});
  }
  return j;
}

Json confusion_json(const ConfusionMatrix& m) {
  return Json{{"true_pass_pred_pass", m.true_pass_pred_pass},
              {"true_pass_pred_fail", m.true_pass_pred_fail},
              {"true_fail_pred_pass", m.true_fail_pred_pass},
              {"true_fail_pred_fail", m.true_fail_pred_fail},
              {"correct", m.correct()},
              {"incorrect", m.incorrect()}};
}

}  // namespace preassess
