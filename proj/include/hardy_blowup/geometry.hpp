#pragma once

#include <string>
#include <string_view>

#include "errors.hpp"

namespace hardy {

enum class GeometryKind { Slab, Ball };

/// Slab: (0,1) with delta = x. Ball: unit ball of dimension `dim`, delta = 1 - r.
struct Geometry {
    GeometryKind kind = GeometryKind::Slab;
    int dim = 1;

    static Geometry slab() { return {GeometryKind::Slab, 1}; }
    static Geometry ball(int n) {
        if (n < 2) throw DomainError("ball geometry needs dim >= 2");
        return {GeometryKind::Ball, n};
    }
    bool is_ball() const { return kind == GeometryKind::Ball; }
};

inline std::string_view to_string(GeometryKind k) { return k == GeometryKind::Ball ? "ball" : "slab"; }

inline Geometry parse_geometry(std::string_view name, int dim) {
    if (name == "slab") return Geometry::slab();
    if (name == "ball") return Geometry::ball(dim);
    throw DomainError("unknown geometry: " + std::string(name));
}

} // namespace hardy
