#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "orientkit/annotator.hpp"

namespace orientkit {

/// Symmetry-class agreement within one category.
struct CategoryReport {
    std::string category;
    /// Count per class; always carries the keys 0, 1, 2 and 4.
    std::map<int, int> alpha_histogram;
    bool consistent = true;
    /// Most frequent class (smallest class on ties).
    std::optional<int> majority_alpha;
    /// Every asset of an inconsistent category, sorted; empty when consistent.
    std::vector<std::string> flagged_asset_ids;

    friend bool operator==(const CategoryReport&, const CategoryReport&) = default;
};

enum class DecisionAction { accept, override_params, discard };

std::string_view to_string(DecisionAction a) noexcept;
DecisionAction parse_action(std::string_view s);

/// Reviewer verdict. `asset_id == "*"` targets the whole category.
struct CalibrationDecision {
    std::string category;
    std::string asset_id;
    DecisionAction action = DecisionAction::accept;
    std::optional<int> alpha;
    std::optional<double> phi_deg;
    std::string reviewer;
    /// ISO-8601, e.g. 2026-01-31T12:00:00Z or with a fractional part / offset.
    std::string timestamp;

    friend bool operator==(const CalibrationDecision&, const CalibrationDecision&) = default;
};

inline constexpr std::string_view kWholeCategory = "*";

/// Throws ValidationError on a malformed decision (bad action payload or timestamp).
void validate(const CalibrationDecision& d);

/// Nanoseconds since the Unix epoch for an ISO-8601 timestamp (UTC when no
/// offset is given). Throws ValidationError when unparseable.
long long parse_iso8601_ns(std::string_view ts);

/// Current UTC time as YYYY-MM-DDTHH:MM:SS.mmmZ.
std::string utc_now_iso8601();

/// Consistency check for the annotations of one category.
CategoryReport check_category(std::span<const AssetAnnotation> annotations);

/// Groups non-discarded annotations by category, checks each (in parallel)
/// and moves flagged `auto` annotations to `needs_review`. Reports are sorted
/// by category.
std::vector<CategoryReport> check_all_categories(std::vector<AssetAnnotation>& annotations,
                                                 std::size_t workers = 1);

/// Resolves the decision log (latest timestamp wins per asset; log order breaks
/// ties; whole-category decisions expand here) and applies it. Discarded
/// annotations stay discarded. Throws UnknownTargetError listing every decision
/// target that does not exist.
std::vector<AssetAnnotation> apply_decisions(std::span<const AssetAnnotation> annotations,
                                             std::span<const CalibrationDecision> decisions);

struct CalibrationSummary {
    std::size_t total_categories = 0;
    std::size_t inconsistent_categories = 0;
    double flag_rate = 0.0;
    std::map<int, int> alpha_distribution;
};

CalibrationSummary summarize(std::span<const CategoryReport> reports);

}  // namespace orientkit
