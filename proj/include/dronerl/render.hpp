#pragma once

// ASCII frames of an episode.
//
//   ?  unknown      #  obstacle     D  drone
//   .  visited once :  twice        +  three or more visits
//
// With the signal overlay, unexplored cells inside the signal radii show the
// section digit instead of '?': 1 innermost, 3 outermost.

#include "dronerl/env.hpp"

#include <string>
#include <vector>

namespace dronerl {

char cell_glyph(CellState s);

/// One string per map row, each exactly map.width() characters.
std::vector<std::string> render_frame(const EnvState& state, bool signal_overlay = false);

std::string frame_text(const std::vector<std::string>& rows);

}  // namespace dronerl
