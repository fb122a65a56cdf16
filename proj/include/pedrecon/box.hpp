#pragma once

#include "pedrecon/semantic.hpp"

namespace pedrecon {

/// Axis-aligned image box with top-left corner (x, y).
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  SemanticClass label = SemanticClass::person;
  double score = 1.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

}  // namespace pedrecon
