#pragma once

// ESA CCI land-cover classes and their urbanizable / non-urbanizable flag.

#include <span>
#include <string>
#include <vector>

namespace sumlab::landcover {

enum class LandClass { Urbanizable, NonUrbanizable };

std::string to_string(LandClass c);

/// Flag of a land-cover code. Throws DomainError listing the valid codes when
/// the code is unknown.
LandClass reclassify(int code);

/// Class label of a code, e.g. "Water bodies".
const std::string& label(int code);

/// All known codes, ascending.
const std::vector<int>& codes();

/// Share of urbanizable pixels in a block of codes (0 for an empty block).
double urbanizable_share(std::span<const int> pixel_codes);

}  // namespace sumlab::landcover
