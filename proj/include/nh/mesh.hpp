#pragma once

#include <array>
#include <string>
#include <vector>

namespace nh {

/// Boundary tags for the box mesher: 0/1 = x min/max, 2/3 = y, 4/5 = z.
enum BoundaryTag : int {
  kXmin = 0, kXmax = 1, kYmin = 2, kYmax = 3, kZmin = 4, kZmax = 5
};

struct BoundaryFace {
  int cell = 0;
  int local_face = 0; // 0..5, see kFaceNodes
  int tag = 0;
};

/// 8-node hexahedral mesh. Cell vertex ordering follows the usual hexahedron
/// convention: nodes 0-3 on the bottom face counterclockwise, 4-7 on top.
struct Mesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 8>> cells;
  std::vector<BoundaryFace> boundary_faces;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
};

/// Local node loops of the six hexahedron faces, indexed by face id.
extern const int kFaceNodes[6][4];

Mesh build_box_mesh(const std::array<double, 3>& extent,
                    const std::array<int, 3>& resolution);

/// Plain-text format: "nv nc nf" header, vertex coordinates, 8-index
/// connectivity rows, then "cell local_face tag" rows.
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(const std::string& path);

} // namespace nh
