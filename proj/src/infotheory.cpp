#include "preassess/infotheory.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "preassess/error.hpp"

namespace preassess {

EpisodeDataset::EpisodeDataset(std::vector<std::string> attributes, std::vector<Episode> records,
                               const std::map<std::string, std::set<std::string>>& extra_domains)
    : attributes_(std::move(attributes)), records_(std::move(records)) {
  for (const auto& a : attributes_) {
    if (!domains_.emplace(a, std::set<std::string>{}).second) {
      throw Error(ErrorCode::ValidationError, "duplicate attribute '" + a + "'");
    }
  }
  for (const auto& [a, features] : extra_domains) {
    auto it = domains_.find(a);
    if (it == domains_.end()) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + a + "'");
    it->second.insert(features.begin(), features.end());
  }
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    if (rec.features.size() != attributes_.size()) {
      throw Error(ErrorCode::ValidationError, "record " + std::to_string(r + 1) + " has " +
                                                  std::to_string(rec.features.size()) + " features, expected " +
                                                  std::to_string(attributes_.size()));
    }
    for (std::size_t i = 0; i < attributes_.size(); ++i) domains_[attributes_[i]].insert(rec.features[i]);
  }
}

const std::set<std::string>& EpisodeDataset::domain(std::string_view attribute) const {
  auto it = domains_.find(attribute);
  if (it == domains_.end()) {
    throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(attribute) + "'");
  }
  return it->second;
}

std::size_t EpisodeDataset::attribute_index(std::string_view attribute) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), attribute);
  if (it == attributes_.end()) {
    throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(attribute) + "'");
  }
  return static_cast<std::size_t>(it - attributes_.begin());
}

LabelCounts EpisodeDataset::label_counts() const {
  LabelCounts c;
  for (const auto& r : records_) (r.label == Outcome::Pass ? c.pass_count : c.fail_count)++;
  return c;
}

EpisodeDataset EpisodeDataset::with_records(std::vector<Episode> records) const {
  EpisodeDataset out = *this;
  out.records_ = std::move(records);
  for (std::size_t r = 0; r < out.records_.size(); ++r) {
    const auto& rec = out.records_[r];
    if (rec.features.size() != attributes_.size()) {
      throw Error(ErrorCode::ValidationError, "record " + std::to_string(r + 1) + " is ragged");
    }
    for (std::size_t i = 0; i < attributes_.size(); ++i) out.domains_[attributes_[i]].insert(rec.features[i]);
  }
  return out;
}

namespace {

double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

std::map<std::string, LabelCounts> counts_by_feature(const EpisodeDataset& d, std::size_t index) {
  std::map<std::string, LabelCounts> out;
  for (const auto& r : d.records()) {
    auto& c = out[r.features[index]];
    (r.label == Outcome::Pass ? c.pass_count : c.fail_count)++;
  }
  return out;
}

}  // namespace

double entropy(const LabelCounts& c) {
  if (c.pass_count < 0 || c.fail_count < 0 || c.total() < 1) {
    throw Error(ErrorCode::EmptyCounts, "entropy needs at least one labelled record");
  }
  const double n = static_cast<double>(c.total());
  const double h = -(plogp(static_cast<double>(c.pass_count) / n) + plogp(static_cast<double>(c.fail_count) / n));
  return h == 0.0 ? 0.0 : h;  // no negative zero
}

double weighted_feature_entropy(const EpisodeDataset& d, std::string_view attribute, std::string_view feature) {
  const auto index = d.attribute_index(attribute);
  if (!d.domain(attribute).count(std::string(feature))) {
    throw Error(ErrorCode::UnknownFeature, "feature '" + std::string(feature) + "' is not in the domain of '" +
                                               std::string(attribute) + "'");
  }
  LabelCounts c;
  for (const auto& r : d.records()) {
    if (r.features[index] == feature) (r.label == Outcome::Pass ? c.pass_count : c.fail_count)++;
  }
  if (c.total() == 0) return 0.0;
  return static_cast<double>(c.total()) / static_cast<double>(d.size()) * entropy(c);
}

double info_gain(const EpisodeDataset& d, std::string_view attribute) {
  const auto index = d.attribute_index(attribute);
  if (d.empty()) throw Error(ErrorCode::EmptyCounts, "info gain of an empty dataset");
  const double n = static_cast<double>(d.size());
  double children = 0.0;
  for (const auto& [_, c] : counts_by_feature(d, index)) children += static_cast<double>(c.total()) / n * entropy(c);
  return entropy(d.label_counts()) - children;
}

double split_info(const EpisodeDataset& d, std::string_view attribute) {
  const auto index = d.attribute_index(attribute);
  if (d.empty()) throw Error(ErrorCode::EmptyCounts, "split info of an empty dataset");
  const double n = static_cast<double>(d.size());
  double s = 0.0;
  for (const auto& [_, c] : counts_by_feature(d, index)) s -= plogp(static_cast<double>(c.total()) / n);
  return s == 0.0 ? 0.0 : s;
}

double gain_ratio(const EpisodeDataset& d, std::string_view attribute) {
  const double si = split_info(d, attribute);
  if (si == 0.0) return 0.0;
  return info_gain(d, attribute) / si;
}

const AttributeGain& GainReport::attribute(std::string_view name) const {
  for (const auto& a : attributes) {
    if (a.attribute == name) return a;
  }
  throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(name) + "'");
}

const FeatureEntropy& GainReport::feature(std::string_view attr, std::string_view feature) const {
  for (const auto& f : attribute(attr).features) {
    if (f.feature == feature) return f;
  }
  throw Error(ErrorCode::UnknownFeature, "unknown feature '" + std::string(feature) + "'");
}

GainReport gain_report(const EpisodeDataset& d) {
  GainReport report;
  report.labels = d.label_counts();
  report.dataset_entropy = entropy(report.labels);
  for (const auto& attr : d.attributes()) {
    AttributeGain ag;
    ag.attribute = attr;
    ag.info_gain = info_gain(d, attr);
    ag.split_info = split_info(d, attr);
    ag.gain_ratio = ag.split_info == 0.0 ? 0.0 : ag.info_gain / ag.split_info;
    const auto counts = counts_by_feature(d, d.attribute_index(attr));
    for (const auto& feature : d.domain(attr)) {
      FeatureEntropy fe;
      fe.feature = feature;
      if (auto it = counts.find(feature); it != counts.end()) fe.counts = it->second;
      fe.weighted_entropy = weighted_feature_entropy(d, attr, feature);
      ag.features.push_back(std::move(fe));
    }
    report.attributes.push_back(std::move(ag));
  }
  return report;
}

std::string gain_report_json(const GainReport& report, bool full_precision) {
  using json = nlohmann::ordered_json;
  auto bits = [&](double v) {
    if (full_precision) return v;
    return std::round(v * 1e4) / 1e4;
  };
  json doc;
  doc["labels"] = {{"pass", report.labels.pass_count}, {"fail", report.labels.fail_count}};
  doc["dataset_entropy"] = bits(report.dataset_entropy);
  doc["attributes"] = json::array();
  for (const auto& a : report.attributes) {
    json aj;
    aj["attribute"] = a.attribute;
    aj["info_gain"] = bits(a.info_gain);
    aj["split_info"] = bits(a.split_info);
    aj["gain_ratio"] = bits(a.gain_ratio);
    aj["features"] = json::array();
    for (const auto& f : a.features) {
      aj["features"].push_back({{"feature", f.feature},
                                {"pass", f.counts.pass_count},
                                {"fail", f.counts.fail_count},
                                {"weighted_entropy", bits(f.weighted_entropy)}});
    }
    doc["attributes"].push_back(std::move(aj));
  }
  return doc.dump(2);
}

}  // namespace preassess
