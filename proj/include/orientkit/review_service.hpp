#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "orientkit/io.hpp"

namespace httplib {
class Server;
}

namespace orientkit::review {

using io::json;

/// Outcome of a submitted decision: HTTP status plus a JSON body.
struct SubmitResult {
    int status = 201;
    json body;
};

/// In-memory review store. Readers run concurrently; decisions are applied
/// one at a time and appended to the decision log before they become visible.
class ReviewState {
public:
    /// `annotations` may still carry `auto` statuses; flagged assets are moved
    /// to `needs_review` here. Reports are recomputed when none are given.
    /// Existing decisions in `decision_log` are replayed at startup.
    ReviewState(std::vector<AssetAnnotation> annotations, std::optional<std::vector<CategoryReport>> reports,
                std::vector<PseudoLabelRecord> pseudo_labels, std::optional<std::filesystem::path> decision_log,
                AnnotatorConfig annotator = {});

    /// status: "", "all", "flagged", "resolved" or "consistent". Throws
    /// ValidationError for anything else.
    json categories(const std::string& status) const;
    std::optional<json> category(const std::string& name) const;
    std::optional<json> asset(const std::string& asset_id) const;
    json status() const;

    /// Validates a POST body and records the decision. 400 for malformed input,
    /// 404 for an unknown category or asset, 201 on success.
    SubmitResult submit(const json& body);

    std::vector<AssetAnnotation> effective_annotations() const;
    std::vector<CalibrationDecision> decisions() const;

private:
    struct CategoryState {
        std::size_t report_index = 0;
        std::vector<std::size_t> members;
    };

    json category_json(const CategoryReport& r) const;
    std::size_t pending_flags(const CategoryReport& r) const;
    void recompute();

    std::vector<AssetAnnotation> base_;
    std::vector<AssetAnnotation> effective_;
    std::vector<CategoryReport> reports_;
    std::map<std::string, std::size_t> asset_index_;
    std::map<std::string, CategoryState> category_index_;
    std::map<std::string, std::vector<PseudoLabelRecord>> views_;
    std::vector<CalibrationDecision> decisions_;
    std::optional<std::filesystem::path> log_path_;
    AnnotatorConfig annotator_;
    mutable std::shared_mutex mutex_;
};

/// Registers the JSON API on `server` and serves `ui_dir` (or a built-in
/// placeholder page when absent) at /.
void register_routes(httplib::Server& server, ReviewState& state,
                     const std::optional<std::filesystem::path>& ui_dir = std::nullopt);

}  // namespace orientkit::review
