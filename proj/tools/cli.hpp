#pragma once

#include <iosfwd>

namespace mlbq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mlbq::cli
