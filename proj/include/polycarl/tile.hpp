#pragma once

#include "polycarl/dyadic.hpp"
#include "polycarl/polynomial.hpp"

namespace polycarl {

// P = (I, P(grad Q_P, I)).  Identity is (cube, net_index).
struct Tile {
  DyadicCube cube;
  GradientField center;         // grad Q_P
  Polynomial center_potential;  // Q_P with Q_P(0) = 0
  int net_index = 0;

  int scale() const { return cube.scale(); }
  int dim() const { return cube.dim(); }

  friend bool operator==(const Tile& a, const Tile& b) {
    return a.cube == b.cube && a.net_index == b.net_index;
  }
};

// aP: the ball of radius a/2 around the center in the Delta(I) seminorm.
struct DilatedTile {
  Tile base;
  double factor = 1.0;
};

}  // namespace polycarl
