#pragma once

#include <array>
#include <string>
#include <string_view>

#include "biasprobe/errors.hpp"

namespace biasprobe {

/// The six subjective trait dimensions judged from faces.
enum class TraitDimension {
    Attractive,
    Competent,
    Dominant,
    Extroverted,
    Likeable,
    Trustworthy,
};

inline constexpr std::array<TraitDimension, 6> all_traits = {
    TraitDimension::Attractive,  TraitDimension::Competent,
    TraitDimension::Dominant,    TraitDimension::Extroverted,
    TraitDimension::Likeable,    TraitDimension::Trustworthy,
};

inline std::string trait_name(TraitDimension t) {
    switch (t) {
        case TraitDimension::Attractive:  return "attractive";
        case TraitDimension::Competent:   return "competent";
        case TraitDimension::Dominant:    return "dominant";
        case TraitDimension::Extroverted: return "extroverted";
        case TraitDimension::Likeable:    return "likeable";
        case TraitDimension::Trustworthy: return "trustworthy";
    }
    throw InvariantViolation("trait_name: unknown TraitDimension");
}

inline TraitDimension trait_from_name(std::string_view name) {
    for (TraitDimension t : all_traits)
        if (trait_name(t) == name) return t;
    throw ParseError("unknown trait name: " + std::string(name));
}

} // namespace biasprobe
