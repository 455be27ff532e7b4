#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace stancebench {

enum class StanceLabel { Against = 0, Favor = 1, None = 2 };

inline constexpr std::array<StanceLabel, 3> kAllLabels = {
    StanceLabel::Against, StanceLabel::Favor, StanceLabel::None};

// Lowercase wire form: "against", "favor", "none".
std::string_view to_string(StanceLabel label);
std::optional<StanceLabel> parse_stance(std::string_view text);

inline constexpr int index_of(StanceLabel label) { return static_cast<int>(label); }

}  // namespace stancebench
