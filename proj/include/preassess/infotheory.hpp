#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "preassess/probability.hpp"

namespace preassess {

struct LabelCounts {
  std::int64_t pass_count = 0;
  std::int64_t fail_count = 0;

  std::int64_t total() const { return pass_count + fail_count; }
  bool operator==(const LabelCounts&) const = default;
};

struct Episode {
  std::vector<std::string> features;  // index-aligned with EpisodeDataset::attributes()
  Outcome label = Outcome::Pass;

  bool operator==(const Episode&) const = default;
};

/// Categorical records labelled Pass/Fail. A record holds one feature per
/// attribute; every feature belongs to its attribute's domain.
class EpisodeDataset {
 public:
  EpisodeDataset() = default;

  /// Domains are the observed features unioned with `extra_domains`.
  /// Throws ValidationError on ragged records or duplicate attributes.
  EpisodeDataset(std::vector<std::string> attributes, std::vector<Episode> records,
                 const std::map<std::string, std::set<std::string>>& extra_domains = {});

  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<Episode>& records() const { return records_; }
  const std::set<std::string>& domain(std::string_view attribute) const;
  const std::map<std::string, std::set<std::string>, std::less<>>& domains() const { return domains_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  /// Position of an attribute. Throws UnknownAttribute.
  std::size_t attribute_index(std::string_view attribute) const;

  LabelCounts label_counts() const;

  /// Same attributes and domains, different records.
  EpisodeDataset with_records(std::vector<Episode> records) const;

  bool operator==(const EpisodeDataset&) const = default;

 private:
  std::vector<std::string> attributes_;
  std::map<std::string, std::set<std::string>, std::less<>> domains_;
  std::vector<Episode> records_;
};

/// Shannon entropy in bits; 0 log 0 = 0. Throws EmptyCounts.
double entropy(const LabelCounts& c);

/// (|S_v| / |S|) * H(S_v) for the records whose `attribute` equals `feature`.
/// Throws UnknownAttribute, UnknownFeature.
double weighted_feature_entropy(const EpisodeDataset& d, std::string_view attribute, std::string_view feature);

double info_gain(const EpisodeDataset& d, std::string_view attribute);
double split_info(const EpisodeDataset& d, std::string_view attribute);
/// info_gain / split_info, 0 when split_info is 0.
double gain_ratio(const EpisodeDataset& d, std::string_view attribute);

struct FeatureEntropy {
  std::string feature;
  LabelCounts counts;
  double weighted_entropy = 0.0;
};

struct AttributeGain {
  std::string attribute;
  double info_gain = 0.0;
  double split_info = 0.0;
  double gain_ratio = 0.0;
  std::vector<FeatureEntropy> features;  // lexicographic
};

struct GainReport {
  LabelCounts labels;
  double dataset_entropy = 0.0;
  std::vector<AttributeGain> attributes;  // dataset declaration order

  const AttributeGain& attribute(std::string_view name) const;
  const FeatureEntropy& feature(std::string_view attribute, std::string_view feature) const;
};

GainReport gain_report(const EpisodeDataset& d);

/// JSON with fixed key order. Display mode rounds bits to 4 decimals;
/// full_precision keeps every double digit.
std::string gain_report_json(const GainReport& report, bool full_precision);

}  // namespace preassess
