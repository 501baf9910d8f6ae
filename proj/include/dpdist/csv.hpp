#pragma once

#include <string>

namespace dpdist {

/// Shortest round-trippable form is not needed; 17 significant digits keep
/// every double exact and the output byte-stable.
std::string format_real(double v);

}  // namespace dpdist
