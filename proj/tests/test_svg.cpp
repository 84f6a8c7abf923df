#include "doctest.h"
#include "synthpop/svg.hpp"

using namespace synthpop;

namespace {

// Crude well-formedness check: every opened element is closed in order.
bool balanced(const std::string& svg) {
  std::vector<std::string> stack;
  std::size_t pos = 0;
  while ((pos = svg.find('<', pos)) != std::string::npos) {
    const std::size_t end = svg.find('>', pos);
    if (end == std::string::npos) return false;
    const std::string tag = svg.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    const std::string name = tag.substr(tag[0] == '/', tag.find_first_of(" \n") - (tag[0] == '/'));
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("scatter plot is well formed and escapes text") {
  std::vector<eval::ScatterPoint> pts{{0.1, 0.2}, {0.3, 0.25}, {0.0, 0.05}};
  const auto svg = plot::scatter_svg(pts, "a < b & c", {"SRMSE 0.1", "r 0.9"});
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.find("SRMSE 0.1") != std::string::npos);
  CHECK(balanced(svg));
  CHECK(balanced(plot::scatter_svg({}, "empty", {})));
}

TEST_CASE("line chart honours log axes and skips non-positive points") {
  plot::Series s{"wgan", {{1000, 5.0}, {10000, 20.0}, {100000, 0.0}}};
  plot::ChartOptions linear{"t", "x", "y", false, false};
  plot::ChartOptions logy{"t", "x", "y", false, true};
  const auto a = plot::line_svg({s}, linear), b = plot::line_svg({s}, logy);
  CHECK(balanced(a));
  CHECK(balanced(b));
  CHECK(a != b);
}
