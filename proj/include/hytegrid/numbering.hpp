#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "hytegrid/function.hpp"

namespace hytegrid {

/// Deterministic global numbering of all owned DoFs of one (kind, level):
/// primitives in ascending ID order, inside a primitive the for_each_owned
/// traversal. Every storage slot of every primitive — ghost copies included —
/// resolves to its owner's global index, so flattened vectors and assembled
/// matrices line up with the distributed storage exactly. The only
/// unresolvable slots are DG0 neighbor-cell rows along domain borders, which
/// mirror no DoF.
class GlobalDoFMap {
  public:
    GlobalDoFMap(const DistributedDomain& domain, FunctionKind kind, int level,
                 TriangleLayout layout = TriangleLayout{});

    FunctionKind kind() const { return kind_; }
    int level() const { return level_; }
    const TriangleLayout& layout() const { return layout_; }
    const DistributedDomain& domain() const { return *domain_; }

    /// Total owned DoFs across the domain.
    std::size_t size() const { return owner_slot_.size(); }

    /// Global index of the DoF stored at (id, slot); ghost slots resolve to
    /// the owning primitive. Throws std::out_of_range for slots that mirror
    /// no DoF.
    std::size_t global_index(PrimitiveID id, std::size_t slot) const;

    /// Owner storage location of a global index.
    std::pair<PrimitiveID, std::size_t> location(std::size_t g) const;

    /// Owned values of f flattened into numbering order / written back from it.
    std::vector<double> gather(const ScalarFunction& f) const;
    void scatter(const std::vector<double>& flat, ScalarFunction& f) const;
    std::vector<std::uint8_t> gather_flags(const ScalarFunction& f) const;

  private:
    void check_function(const ScalarFunction& f) const;

    const DistributedDomain* domain_;
    FunctionKind kind_;
    int level_;
    TriangleLayout layout_;
    std::map<std::pair<std::uint64_t, std::size_t>, std::size_t> index_;
    std::vector<std::pair<PrimitiveID, std::size_t>> owner_slot_;
};

} // namespace hytegrid
