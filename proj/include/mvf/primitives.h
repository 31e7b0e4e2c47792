#pragma once

#include "mvf/mesh.h"

namespace mvf {

// Parametric test meshes, all sized to fit inside the unit view sphere.

// Subdivided icosahedron projected to the given radius.
// 20 * 4^subdivisions triangles.
TriangleMesh make_icosphere(double radius, int subdivisions);

// Axis-aligned box centered at the origin, 12 triangles.
TriangleMesh make_box(const Vec3& half_extents);

// Ring torus around the y axis: major radius to the tube center,
// minor radius of the tube. 2 * major_segments * minor_segments triangles.
TriangleMesh make_torus(double major_radius, double minor_radius,
                        int major_segments, int minor_segments);

// Smooth asymmetric blob: icosphere with a low-frequency radial
// displacement, rescaled to the given maximum radius. Useful as a
// fixture without any rotational symmetry.
TriangleMesh make_blob(double max_radius, int subdivisions);

}  // namespace mvf
