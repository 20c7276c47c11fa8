#include "orientkit/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fmt/format.h>
#include <set>
#include <unordered_map>

#include "orientkit/errors.hpp"
#include "orientkit/parallel.hpp"

namespace orientkit {

namespace {

std::map<int, int> empty_class_histogram() { return {{0, 0}, {1, 0}, {2, 0}, {4, 0}}; }

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant's algorithm).
long long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

int digits(std::string_view s, std::size_t pos, std::size_t n) {
    if (pos + n > s.size()) throw ValidationError("truncated timestamp");
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') throw ValidationError("bad digit in timestamp");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

void expect(std::string_view s, std::size_t pos, char c) {
    if (pos >= s.size() || s[pos] != c) throw ValidationError("malformed timestamp");
}

}  // namespace

std::string_view to_string(DecisionAction a) noexcept {
    switch (a) {
        case DecisionAction::accept: return "accept";
        case DecisionAction::override_params: return "override";
        case DecisionAction::discard: return "discard";
    }
    return "accept";
}

DecisionAction parse_action(std::string_view s) {
    if (s == "accept") return DecisionAction::accept;
    if (s == "override") return DecisionAction::override_params;
    if (s == "discard") return DecisionAction::discard;
    throw ValidationError("unknown action: " + std::string(s));
}

long long parse_iso8601_ns(std::string_view ts) {
    try {
        // YYYY-MM-DDTHH:MM:SS[.f+][Z|+HH:MM|-HH:MM]
        const int year = digits(ts, 0, 4);
        expect(ts, 4, '-');
        const int month = digits(ts, 5, 2);
        expect(ts, 7, '-');
        const int day = digits(ts, 8, 2);
        if (ts.size() <= 10 || (ts[10] != 'T' && ts[10] != ' ')) throw ValidationError("missing time part");
        const int hour = digits(ts, 11, 2);
        expect(ts, 13, ':');
        const int minute = digits(ts, 14, 2);
        expect(ts, 16, ':');
        const int second = digits(ts, 17, 2);
        if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
            throw ValidationError("timestamp field out of range");
        }
        std::size_t pos = 19;
        long long frac_ns = 0;
        if (pos < ts.size() && ts[pos] == '.') {
            ++pos;
            long long scale = 100000000;
            const std::size_t start = pos;
            while (pos < ts.size() && ts[pos] >= '0' && ts[pos] <= '9') {
                frac_ns += (ts[pos] - '0') * scale;
                scale /= 10;
                ++pos;
            }
            if (pos == start) throw ValidationError("empty fractional seconds");
        }
        long long offset_s = 0;
        if (pos < ts.size()) {
            if (ts[pos] == 'Z' && pos + 1 == ts.size()) {
                ++pos;
            } else if ((ts[pos] == '+' || ts[pos] == '-') && pos + 6 == ts.size()) {
                const int sign = ts[pos] == '+' ? 1 : -1;
                const int oh = digits(ts, pos + 1, 2);
                expect(ts, pos + 3, ':');
                const int om = digits(ts, pos + 4, 2);
                offset_s = sign * (oh * 3600LL + om * 60LL);
                pos += 6;
            } else {
                throw ValidationError("bad timezone suffix");
            }
        }
        const long long secs = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400LL +
                               hour * 3600LL + minute * 60LL + second - offset_s;
        return secs * 1000000000LL + frac_ns;
    } catch (const ValidationError& e) {
        throw ValidationError("invalid ISO-8601 timestamp '" + std::string(ts) + "': " + e.what());
    }
}

std::string utc_now_iso8601() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                       tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

void validate(const CalibrationDecision& d) {
    if (d.category.empty()) throw ValidationError("decision category must not be empty");
    if (d.asset_id.empty()) throw ValidationError("decision asset_id must not be empty");
    parse_iso8601_ns(d.timestamp);
    if (d.action == DecisionAction::override_params) {
        if (!d.alpha) throw ValidationError("override requires alpha");
        if (!is_symmetry_class(*d.alpha)) throw ValidationError("override alpha must be one of {0, 1, 2, 4}");
        if (!d.phi_deg) throw ValidationError("override requires phi_deg");
        if (!std::isfinite(*d.phi_deg)) throw ValidationError("override phi_deg must be finite");
    }
}

CategoryReport check_category(std::span<const AssetAnnotation> annotations) {
    if (annotations.empty()) throw ValidationError("check_category needs at least one annotation");
    CategoryReport report;
    report.category = annotations.front().category;
    report.alpha_histogram = empty_class_histogram();
    for (const auto& a : annotations) {
        if (a.category != report.category) {
            throw ValidationError("annotations mix categories: " + report.category + ", " + a.category);
        }
        if (!is_symmetry_class(a.params.alpha)) throw ValidationError("annotation alpha outside {0, 1, 2, 4}");
        ++report.alpha_histogram[a.params.alpha];
    }
    int classes_present = 0, best_count = -1;
    for (const auto& [alpha, count] : report.alpha_histogram) {  // ascending alpha
        if (count > 0) ++classes_present;
        if (count > best_count) {
            best_count = count;
            report.majority_alpha = alpha;
        }
    }
    report.consistent = classes_present == 1;
    if (!report.consistent) {
        for (const auto& a : annotations) report.flagged_asset_ids.push_back(a.asset_id);
        std::sort(report.flagged_asset_ids.begin(), report.flagged_asset_ids.end());
    }
    return report;
}

std::vector<CategoryReport> check_all_categories(std::vector<AssetAnnotation>& annotations, std::size_t workers) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        if (annotations[i].status != AnnotationStatus::discarded) groups[annotations[i].category].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> index;
    for (const auto& [cat, idx] : groups) index.push_back(&idx);

    std::vector<CategoryReport> reports(index.size());
    parallel_for(index.size(), workers, [&](std::size_t g) {
        std::vector<AssetAnnotation> members;
        for (std::size_t i : *index[g]) members.push_back(annotations[i]);
        reports[g] = check_category(members);
    });
    for (std::size_t g = 0; g < reports.size(); ++g) {
        if (reports[g].consistent) continue;
        for (std::size_t i : *index[g]) {
            if (annotations[i].status == AnnotationStatus::automatic) {
                annotations[i].status = AnnotationStatus::needs_review;
            }
        }
    }
    return reports;
}

std::vector<AssetAnnotation> apply_decisions(std::span<const AssetAnnotation> annotations,
                                             std::span<const CalibrationDecision> decisions) {
    std::unordered_map<std::string, std::size_t> by_id;
    std::set<std::string> categories;
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        by_id.emplace(annotations[i].asset_id, i);
        categories.insert(annotations[i].category);
    }

    std::vector<std::string> unknown;
    std::vector<long long> stamps(decisions.size());
    for (std::size_t k = 0; k < decisions.size(); ++k) {
        const auto& d = decisions[k];
        validate(d);
        stamps[k] = parse_iso8601_ns(d.timestamp);
        if (d.asset_id == kWholeCategory) {
            if (!categories.contains(d.category)) unknown.push_back(d.category + "/*");
        } else {
            const auto it = by_id.find(d.asset_id);
            if (it == by_id.end() || annotations[it->second].category != d.category) {
                unknown.push_back(d.category + "/" + d.asset_id);
            }
        }
    }
    if (!unknown.empty()) {
        std::string msg = "unknown decision targets:";
        for (const auto& u : unknown) msg += " " + u;
        throw UnknownTargetError(msg);
    }

    // Effective decision per asset: greatest (timestamp, log position).
    std::vector<std::optional<std::size_t>> effective(annotations.size());
    auto consider = [&](std::size_t asset, std::size_t k) {
        auto& cur = effective[asset];
        if (!cur || stamps[k] > stamps[*cur] || (stamps[k] == stamps[*cur] && k > *cur)) cur = k;
    };
    for (std::size_t k = 0; k < decisions.size(); ++k) {
        const auto& d = decisions[k];
        if (d.asset_id == kWholeCategory) {
            for (std::size_t i = 0; i < annotations.size(); ++i) {
                if (annotations[i].category == d.category) consider(i, k);
            }
        } else {
            consider(by_id.at(d.asset_id), k);
        }
    }

    std::vector<AssetAnnotation> out(annotations.begin(), annotations.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!effective[i] || out[i].status == AnnotationStatus::discarded) continue;
        const auto& d = decisions[*effective[i]];
        auto& a = out[i];
        switch (d.action) {
            case DecisionAction::accept:
                a.status = AnnotationStatus::automatic;
                break;
            case DecisionAction::override_params:
                a.params.alpha = *d.alpha;
                a.params.phi_deg = *d.alpha >= 1 ? canonicalize_phase(*d.phi_deg, *d.alpha) : 0.0;
                a.status = AnnotationStatus::human_overridden;
                break;
            case DecisionAction::discard:
                a.status = AnnotationStatus::discarded;
                a.reason = "discarded by reviewer " + d.reviewer;
                break;
        }
    }
    return out;
}

CalibrationSummary summarize(std::span<const CategoryReport> reports) {
    CalibrationSummary s;
    s.alpha_distribution = empty_class_histogram();
    s.total_categories = reports.size();
    for (const auto& r : reports) {
        if (!r.consistent) ++s.inconsistent_categories;
        for (const auto& [alpha, count] : r.alpha_histogram) s.alpha_distribution[alpha] += count;
    }
    s.flag_rate = s.total_categories == 0
                      ? 0.0
                      : static_cast<double>(s.inconsistent_categories) / static_cast<double>(s.total_categories);
    return s;
}

}  // namespace orientkit
