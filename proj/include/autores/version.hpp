#pragma once

namespace autores {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace autores
