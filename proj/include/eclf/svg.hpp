#pragma once

#include <string>
#include <vector>

namespace eclf::svg {

struct Track {
    std::string label;
    std::string color;
    std::vector<double> values;  ///< y values at x = 0, 1, ...; x offset via `first_x`
    double first_x = 0.0;
};

struct Panel {
    std::string title;
    std::vector<Track> tracks;
};

/// Line chart panels stacked vertically, each with its own y range, a frame,
/// min/max y tick labels and a legend. `x_labels`, if given, label x = 0, 1, ...
/// (every `label_step`-th one is drawn).
std::string line_chart(const std::vector<Panel>& panels, const std::vector<std::string>& x_labels = {},
                       int width = 900, int panel_height = 220, int label_step = 12);

}  // namespace eclf::svg
