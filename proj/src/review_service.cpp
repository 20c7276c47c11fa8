#include "orientkit/review_service.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "orientkit/errors.hpp"

namespace orientkit::review {

namespace {

constexpr const char* kJson = "application/json";

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>orientkit review</title></head>
<body>
<h1>orientkit review service</h1>
<p>No UI bundle is mounted. Start the service with <code>--ui-dir</code> to serve one.</p>
<ul>
<li><a href="/api/status">/api/status</a></li>
<li><a href="/api/categories?status=flagged">/api/categories?status=flagged</a></li>
</ul>
</body></html>
)";

struct FieldError {
    std::string field;
    std::string message;
};

SubmitResult bad_request(const FieldError& e) {
    return {400, json{{"error", e.message}, {"field", e.field}}};
}

CalibrationDecision decision_from_body(const json& body) {
    if (!body.is_object()) throw FieldError{"", "request body must be a JSON object"};
    auto req_str = [&](const char* key) {
        if (!body.contains(key)) throw FieldError{key, std::string("missing field '") + key + "'"};
        if (!body.at(key).is_string() || body.at(key).get<std::string>().empty()) {
            throw FieldError{key, std::string("field '") + key + "' must be a non-empty string"};
        }
        return body.at(key).get<std::string>();
    };
    auto present = [&](const char* key) { return body.contains(key) && !body.at(key).is_null(); };

    CalibrationDecision d;
    d.category = req_str("category");
    d.asset_id = req_str("asset_id");
    const std::string action = req_str("action");
    try {
        d.action = parse_action(action);
    } catch (const ValidationError&) {
        throw FieldError{"action", "action must be accept, override or discard"};
    }
    if (present("alpha")) {
        const json& a = body.at("alpha");
        if (!a.is_number_integer()) throw FieldError{"alpha", "alpha must be an integer"};
        if (!is_symmetry_class(a.get<int>())) throw FieldError{"alpha", "alpha must be one of 0, 1, 2, 4"};
        d.alpha = a.get<int>();
    }
    if (present("phi_deg")) {
        const json& p = body.at("phi_deg");
        if (!p.is_number() || !std::isfinite(p.get<double>())) {
            throw FieldError{"phi_deg", "phi_deg must be a finite number"};
        }
        d.phi_deg = p.get<double>();
    }
    if (d.action == DecisionAction::override_params) {
        if (!d.alpha) throw FieldError{"alpha", "override requires alpha"};
        if (!d.phi_deg) throw FieldError{"phi_deg", "override requires phi_deg"};
    }
    d.reviewer = present("reviewer") ? req_str("reviewer") : "reviewer";
    if (present("timestamp")) {
        d.timestamp = req_str("timestamp");
        try {
            parse_iso8601_ns(d.timestamp);
        } catch (const ValidationError& e) {
            throw FieldError{"timestamp", e.what()};
        }
    } else {
        d.timestamp = utc_now_iso8601();
    }
    return d;
}

json annotation_json(const AssetAnnotation& a) {
    json j = io::to_json(a);
    j.erase("schema_version");
    return j;
}

}  // namespace

ReviewState::ReviewState(std::vector<AssetAnnotation> annotations,
                         std::optional<std::vector<CategoryReport>> reports,
                         std::vector<PseudoLabelRecord> pseudo_labels,
                         std::optional<std::filesystem::path> decision_log, AnnotatorConfig annotator)
    : base_(std::move(annotations)), log_path_(std::move(decision_log)), annotator_(std::move(annotator)) {
    for (std::size_t i = 0; i < base_.size(); ++i) {
        if (!asset_index_.emplace(base_[i].asset_id, i).second) {
            throw ValidationError("duplicate asset_id " + base_[i].asset_id);
        }
    }
    if (reports) {
        reports_ = std::move(*reports);
        for (const auto& r : reports_) {
            for (const auto& id : r.flagged_asset_ids) {
                const auto it = asset_index_.find(id);
                if (it == asset_index_.end()) throw ValidationError("report flags unknown asset " + id);
                auto& a = base_[it->second];
                if (a.status == AnnotationStatus::automatic) a.status = AnnotationStatus::needs_review;
            }
        }
    } else {
        reports_ = check_all_categories(base_);
    }
    for (std::size_t r = 0; r < reports_.size(); ++r) category_index_[reports_[r].category].report_index = r;
    for (std::size_t i = 0; i < base_.size(); ++i) {
        const auto it = category_index_.find(base_[i].category);
        if (it != category_index_.end()) it->second.members.push_back(i);
    }
    for (auto& rec : pseudo_labels) views_[rec.asset_id].push_back(std::move(rec));

    if (log_path_ && std::filesystem::exists(*log_path_)) {
        auto logged = io::read_decisions(*log_path_);
        for (const auto& w : logged.warnings) spdlog::warn("{}: {}", log_path_->string(), w);
        decisions_ = std::move(logged.items);
    }
    recompute();
}

void ReviewState::recompute() { effective_ = apply_decisions(base_, decisions_); }

std::size_t ReviewState::pending_flags(const CategoryReport& r) const {
    std::size_t pending = 0;
    for (const auto& id : r.flagged_asset_ids) {
        if (effective_[asset_index_.at(id)].status == AnnotationStatus::needs_review) ++pending;
    }
    return pending;
}

json ReviewState::category_json(const CategoryReport& r) const {
    json j = io::to_json(r);
    j.erase("schema_version");
    const std::size_t pending = pending_flags(r);
    j["pending_flags"] = pending;
    j["resolved_flags"] = r.flagged_asset_ids.size() - pending;
    return j;
}

json ReviewState::categories(const std::string& status) const {
    if (!status.empty() && status != "all" && status != "flagged" && status != "resolved" && status != "consistent") {
        throw ValidationError("status must be all, flagged, resolved or consistent");
    }
    std::shared_lock lock(mutex_);
    json out = json::array();
    for (const auto& r : reports_) {
        const std::size_t pending = r.consistent ? 0 : pending_flags(r);
        const bool keep = status.empty() || status == "all" || (status == "consistent" && r.consistent) ||
                          (status == "flagged" && !r.consistent && pending > 0) ||
                          (status == "resolved" && !r.consistent && pending == 0);
        if (keep) out.push_back(category_json(r));
    }
    return out;
}

std::optional<json> ReviewState::category(const std::string& name) const {
    std::shared_lock lock(mutex_);
    const auto it = category_index_.find(name);
    if (it == category_index_.end()) return std::nullopt;
    json j = category_json(reports_[it->second.report_index]);
    json assets = json::array();
    for (std::size_t i : it->second.members) assets.push_back(annotation_json(effective_[i]));
    j["assets"] = assets;
    return j;
}

std::optional<json> ReviewState::asset(const std::string& asset_id) const {
    std::shared_lock lock(mutex_);
    const auto it = asset_index_.find(asset_id);
    if (it == asset_index_.end()) return std::nullopt;
    const AssetAnnotation& a = effective_[it->second];
    json j = annotation_json(a);

    json histogram = nullptr;
    const auto v = views_.find(asset_id);
    if (v != views_.end()) {
        try {
            histogram = build_histogram(v->second, annotator_).bins();
        } catch (const InsufficientDataError&) {
        }
    }
    j["histogram"] = histogram;
    j["curve"] = make_periodic_target(a.params).bins();
    j["candidates"] = symmetry_candidates(a.params.phi_deg, a.params.alpha);
    const auto c = category_index_.find(a.category);
    bool flagged = false;
    if (c != category_index_.end()) {
        const auto& ids = reports_[c->second.report_index].flagged_asset_ids;
        flagged = std::binary_search(ids.begin(), ids.end(), asset_id);
    }
    j["flagged"] = flagged;
    return j;
}

json ReviewState::status() const {
    std::shared_lock lock(mutex_);
    std::size_t consistent = 0, flagged = 0, resolved = 0, pending = 0, flags = 0;
    for (const auto& r : reports_) {
        if (r.consistent) {
            ++consistent;
            continue;
        }
        const std::size_t p = pending_flags(r);
        pending += p;
        flags += r.flagged_asset_ids.size();
        ++(p > 0 ? flagged : resolved);
    }
    return json{{"categories", reports_.size()}, {"consistent_categories", consistent},
                {"flagged_categories", flagged},  {"resolved_categories", resolved},
                {"pending_flags", pending},       {"resolved_flags", flags - pending},
                {"decisions", decisions_.size()}};
}

SubmitResult ReviewState::submit(const json& body) {
    CalibrationDecision d;
    try {
        d = decision_from_body(body);
    } catch (const FieldError& e) {
        return bad_request(e);
    }

    std::unique_lock lock(mutex_);
    std::vector<std::size_t> touched;
    if (d.asset_id == kWholeCategory) {
        const auto it = category_index_.find(d.category);
        if (it == category_index_.end()) {
            return {404, json{{"error", "unknown category " + d.category}, {"field", "category"}}};
        }
        touched = it->second.members;
    } else {
        const auto it = asset_index_.find(d.asset_id);
        if (it == asset_index_.end()) {
            return {404, json{{"error", "unknown asset " + d.asset_id}, {"field", "asset_id"}}};
        }
        if (base_[it->second].category != d.category) {
            return {404, json{{"error", "asset " + d.asset_id + " is not in category " + d.category},
                              {"field", "category"}}};
        }
        touched.push_back(it->second);
    }

    if (log_path_) io::append_jsonl_line(*log_path_, io::to_json(d));
    decisions_.push_back(d);
    recompute();
    spdlog::info("decision {} {}/{} by {}", to_string(d.action), d.category, d.asset_id, d.reviewer);

    json decision = io::to_json(d);
    decision.erase("schema_version");
    json updated = json::array();
    for (std::size_t i : touched) updated.push_back(annotation_json(effective_[i]));
    return {201, json{{"decision", decision}, {"annotations", updated}}};
}

std::vector<AssetAnnotation> ReviewState::effective_annotations() const {
    std::shared_lock lock(mutex_);
    return effective_;
}

std::vector<CalibrationDecision> ReviewState::decisions() const {
    std::shared_lock lock(mutex_);
    return decisions_;
}

void register_routes(httplib::Server& server, ReviewState& state, const std::optional<std::filesystem::path>& ui_dir) {
    auto reply = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), kJson);
    };
    auto not_found = [reply](httplib::Response& res, const std::string& what) {
        reply(res, 404, json{{"error", what}});
    };

    // SO_REUSEADDR only: SO_REUSEPORT would let a second instance share the port.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    server.set_exception_handler([reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        spdlog::error("request failed: {}", what);
        reply(res, 500, json{{"error", what}});
    });

    server.Get("/api/categories", [&state, reply](const httplib::Request& req, httplib::Response& res) {
        try {
            reply(res, 200, state.categories(req.get_param_value("status")));
        } catch (const ValidationError& e) {
            reply(res, 400, json{{"error", e.what()}, {"field", "status"}});
        }
    });
    server.Get(R"(/api/categories/(.+))", [&state, reply, not_found](const httplib::Request& req,
                                                                     httplib::Response& res) {
        const std::string name = req.matches[1];
        if (auto j = state.category(name)) {
            reply(res, 200, *j);
        } else {
            not_found(res, "unknown category " + name);
        }
    });
    server.Get(R"(/api/assets/(.+))", [&state, reply, not_found](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (auto j = state.asset(id)) {
            reply(res, 200, *j);
        } else {
            not_found(res, "unknown asset " + id);
        }
    });
    server.Get("/api/status", [&state, reply](const httplib::Request&, httplib::Response& res) {
        reply(res, 200, state.status());
    });
    server.Post("/api/decisions", [&state, reply](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error& e) {
            reply(res, 400, json{{"error", std::string("invalid JSON: ") + e.what()}, {"field", ""}});
            return;
        }
        const SubmitResult r = state.submit(body);
        reply(res, r.status, r.body);
    });

    if (ui_dir && server.set_mount_point("/", ui_dir->string())) return;
    if (ui_dir) spdlog::warn("UI directory {} not found; serving placeholder page", ui_dir->string());
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
    });
}

}  // namespace orientkit::review
