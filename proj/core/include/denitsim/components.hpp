#pragma once

#include <array>

namespace denitsim {

/// Component ordering shared by bulk liquid and biofilm phases.
/// Solubles first (they diffuse), particulates last.
enum ComponentIndex : int {
  kSS = 0,    // readily biodegradable substrate, gCOD/m3
  kSNO3 = 1,  // nitrate N, gN/m3
  kSNO2 = 2,  // nitrite N, gN/m3
  kSN2 = 3,   // dinitrogen N (dissolved bookkeeping pool), gN/m3
  kXH = 4,    // heterotrophic biomass, gCOD/m3
  kXI = 5,    // inert particulate COD, gCOD/m3
  kComponentCount = 6,
};

inline constexpr int kSolubleCount = 4;  // kSS..kSN2

using Components = std::array<double, kComponentCount>;

const char* component_name(int idx);

/// COD content per unit of component (negative = oxidized relative to the
/// reference; nitrate carries -40/14 gCOD/gN of "oxidation credit", nitrite
/// -24/14, N2 is the reference state). Dot this with any reaction row and the
/// result must vanish.
const Components& cod_content();

/// Nitrogen content per unit of component with biomass N fraction i_XB.
Components nitrogen_content(double i_XB);

}  // namespace denitsim
