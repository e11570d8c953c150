#include "dronerl/render.hpp"

namespace dronerl {

char cell_glyph(CellState s) {
  switch (s) {
    case CellState::Unknown: return '?';
    case CellState::Obstacle: return '#';
    case CellState::VisitedOnce: return '.';
    case CellState::VisitedTwice: return ':';
    case CellState::VisitedThriceOrMore: return '+';
  }
  return '?';
}

std::vector<std::string> render_frame(const EnvState& state, bool signal_overlay) {
  const GridMap& map = state.map;
  std::vector<std::string> rows(static_cast<std::size_t>(map.height()), std::string(map.width(), '?'));
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      const CellState s = map.at({x, y});
      char g = cell_glyph(s);
      if (signal_overlay && s == CellState::Unknown) {
        const Section sec = signal_section(distance({x, y}, state.signal.center), state.signal);
        if (sec != Section::NoSignal) g = static_cast<char>('0' + (4 - static_cast<int>(sec)));
      }
      rows[y][x] = g;
    }
  }
  for (const auto& d : state.drones) {
    if (map.in_bounds(d.position)) rows[d.position.y][d.position.x] = 'D';
  }
  return rows;
}

std::string frame_text(const std::vector<std::string>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r;
    out += '\n';
  }
  return out;
}

}  // namespace dronerl
