#pragma once

// Shared domain vocabulary: tracker and site taxonomies, the base-score
// table, and the fixed-point score type everything else computes with.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "tptscore/error.hpp"

namespace tptscore {

enum class TptCategory : std::uint8_t {
    SessionReplay,
    AdultAdvertising,
    SocialMedia,
    Analytics,
    Advertising,
    Comments,
    AudioVideoPlayer,
    CustomerInteraction,
};

inline constexpr std::array<TptCategory, 8> kAllTptCategories = {
    TptCategory::SessionReplay, TptCategory::AdultAdvertising, TptCategory::SocialMedia,
    TptCategory::Analytics,     TptCategory::Advertising,      TptCategory::Comments,
    TptCategory::AudioVideoPlayer, TptCategory::CustomerInteraction,
};

enum class SiteCategory : std::uint8_t {
    Adult,
    Banking,
    ECommerce,
    Educational,
    Healthcare,
    News,
    Ngo,
    Political,
    SocialMedia,
    SubscriptionService,
    Other,
};

inline constexpr std::array<SiteCategory, 11> kAllSiteCategories = {
    SiteCategory::Adult,     SiteCategory::Banking,     SiteCategory::ECommerce,
    SiteCategory::Educational, SiteCategory::Healthcare, SiteCategory::News,
    SiteCategory::Ngo,       SiteCategory::Political,   SiteCategory::SocialMedia,
    SiteCategory::SubscriptionService, SiteCategory::Other,
};

constexpr std::string_view to_string(TptCategory c) noexcept {
    switch (c) {
    case TptCategory::SessionReplay: return "session_replay";
    case TptCategory::AdultAdvertising: return "adult_advertising";
    case TptCategory::SocialMedia: return "social_media";
    case TptCategory::Analytics: return "analytics";
    case TptCategory::Advertising: return "advertising";
    case TptCategory::Comments: return "comments";
    case TptCategory::AudioVideoPlayer: return "audio_video_player";
    case TptCategory::CustomerInteraction: return "customer_interaction";
    }
    return "";
}

constexpr std::string_view to_string(SiteCategory c) noexcept {
    switch (c) {
    case SiteCategory::Adult: return "adult";
    case SiteCategory::Banking: return "banking";
    case SiteCategory::ECommerce: return "e_commerce";
    case SiteCategory::Educational: return "educational";
    case SiteCategory::Healthcare: return "healthcare";
    case SiteCategory::News: return "news";
    case SiteCategory::Ngo: return "ngo";
    case SiteCategory::Political: return "political";
    case SiteCategory::SocialMedia: return "social_media";
    case SiteCategory::SubscriptionService: return "subscription_service";
    case SiteCategory::Other: return "other";
    }
    return "";
}

inline std::optional<TptCategory> try_parse_tpt_category(std::string_view s) noexcept {
    for (auto c : kAllTptCategories) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

inline TptCategory parse_tpt_category(std::string_view s) {
    if (auto c = try_parse_tpt_category(s)) return *c;
    throw Error(ErrorCode::UnknownCategory, "unknown tracker category \"" + std::string(s) + "\"");
}

inline std::optional<SiteCategory> try_parse_site_category(std::string_view s) noexcept {
    for (auto c : kAllSiteCategories) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

inline SiteCategory parse_site_category(std::string_view s) {
    if (auto c = try_parse_site_category(s)) return *c;
    throw Error(ErrorCode::UnknownCategory, "unknown site category \"" + std::string(s) + "\"");
}

/// Non-negative score with a granularity of one half, stored as a count of
/// halves. Every score the algorithm can reach is a multiple of 0.5, so the
/// representation is exact.
class ScoreHalf {
public:
    constexpr ScoreHalf() = default;

    static constexpr ScoreHalf from_halves(std::int64_t halves) {
        if (halves < 0) throw std::domain_error("ScoreHalf cannot be negative");
        ScoreHalf s;
        s.halves_ = halves;
        return s;
    }

    static constexpr ScoreHalf from_whole(std::int64_t whole) { return from_halves(whole * 2); }

    constexpr std::int64_t halves() const noexcept { return halves_; }
    constexpr bool is_whole() const noexcept { return halves_ % 2 == 0; }
    double to_double() const noexcept { return static_cast<double>(halves_) / 2.0; }

    /// x 1.5. Only defined on whole values; a half-valued input would leave
    /// the half grid.
    constexpr ScoreHalf times_three_halves() const {
        if (!is_whole()) throw std::domain_error("1.5x multiplier applied to a non-whole score");
        return from_halves(halves_ / 2 * 3);
    }

    constexpr ScoreHalf minus_one() const { return from_halves(halves_ - 2); }

    constexpr ScoreHalf& operator+=(ScoreHalf other) noexcept {
        halves_ += other.halves_;
        return *this;
    }
    friend constexpr ScoreHalf operator+(ScoreHalf a, ScoreHalf b) noexcept { return a += b; }
    friend constexpr auto operator<=>(ScoreHalf, ScoreHalf) = default;

    /// Decimal rendering with exactly one fractional digit ("6.0", "7.5").
    std::string to_string() const {
        return std::to_string(halves_ / 2) + (halves_ % 2 ? ".5" : ".0");
    }

private:
    std::int64_t halves_ = 0;
};

/// Discomfort ranking from the user survey: higher is less comfortable.
constexpr ScoreHalf base_score(TptCategory c) {
    switch (c) {
    case TptCategory::SessionReplay: return ScoreHalf::from_whole(8);
    case TptCategory::AdultAdvertising: return ScoreHalf::from_whole(7);
    case TptCategory::SocialMedia: return ScoreHalf::from_whole(6);
    case TptCategory::Analytics: return ScoreHalf::from_whole(5);
    case TptCategory::Advertising: return ScoreHalf::from_whole(4);
    case TptCategory::Comments: return ScoreHalf::from_whole(3);
    case TptCategory::AudioVideoPlayer: return ScoreHalf::from_whole(2);
    case TptCategory::CustomerInteraction: return ScoreHalf::from_whole(1);
    }
    return ScoreHalf{};
}

struct TptPattern {
    std::string id;
    std::string name;
    std::string host_suffix;
    std::optional<std::string> path_regex;
    TptCategory category = TptCategory::Analytics;
    std::string company;

    friend bool operator==(const TptPattern&, const TptPattern&) = default;
};

struct Detection {
    std::string pattern_id;
    std::string matched_url;
    TptCategory category = TptCategory::Analytics;
    std::string company;

    friend bool operator==(const Detection&, const Detection&) = default;
};

} // namespace tptscore
