#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "hytegrid/communication.hpp"
#include "hytegrid/field.hpp"

namespace hytegrid {

/// A scalar grid function over the distributed refined mesh: one FieldData
/// attachment per primitive, levels [min_level, max_level]. Construction
/// allocates storage (zero-initialized) and boundary flags on every local
/// primitive and registers the field's exchange channel.
class ScalarFunction {
  public:
    ScalarFunction(std::string name, DistributedDomain& domain, FunctionKind kind, int min_level,
                   int max_level, BoundaryConditions bc = {}, TriangleLayout layout = TriangleLayout{});

    const std::string& name() const { return name_; }
    FunctionKind kind() const { return kind_; }
    int min_level() const { return min_level_; }
    int max_level() const { return max_level_; }
    DataHandle handle() const { return handle_; }
    std::uint32_t channel() const { return handle_.id; }
    const TriangleLayout& layout() const { return layout_; }
    DistributedDomain& domain() const { return *domain_; }
    const BoundaryConditions& boundary_conditions() const { return bc_; }

    /// Exchange serializer for this field; register with a Controller under
    /// channel().
    std::shared_ptr<const PackInfo> pack_info() const { return pack_info_; }

    // Domain-scope storage access by primitive ID.
    std::vector<double>& values(PrimitiveID id, int level);
    const std::vector<double>& values(PrimitiveID id, int level) const;
    const std::vector<std::uint8_t>& flags(PrimitiveID id, int level) const;

  private:
    std::string name_;
    DistributedDomain* domain_;
    FunctionKind kind_;
    int min_level_;
    int max_level_;
    BoundaryConditions bc_;
    TriangleLayout layout_;
    DataHandle handle_;
    std::shared_ptr<const FieldPackInfo> pack_info_;
};

/// Sets owned DoFs whose flag is in `flag_mask` to expr(x, y); ghosts are left
/// untouched and need a sync afterwards.
void interpolate(ScalarFunction& f, const std::function<double(double, double)>& expr, int level,
                 std::uint8_t flag_mask = ALL_DOF_FLAGS);

/// dst := alpha*x1 + beta*x2 on owned DoFs with flag in `flag_mask`; no
/// communication and no ghost writes.
void assign(double alpha, const ScalarFunction& x1, double beta, const ScalarFunction& x2,
            ScalarFunction& dst, int level, std::uint8_t flag_mask = ALL_DOF_FLAGS);

/// dst += gamma*y on owned DoFs with flag in `flag_mask`.
void add_scaled(ScalarFunction& dst, double gamma, const ScalarFunction& y, int level,
                std::uint8_t flag_mask = ALL_DOF_FLAGS);

/// Global dot product over owned DoFs (each counted exactly once). Partial
/// sums per primitive are combined in a fixed binary tree over the ID-sorted
/// primitive list, so the result is bitwise reproducible for any rank count;
/// every rank ends up with the same value.
double dot(const ScalarFunction& x1, const ScalarFunction& x2, int level);

double norm2(const ScalarFunction& f, int level);
double max_abs(const ScalarFunction& f, int level);

/// Ghost refresh for one field: the given directions, or the kind's full
/// schedule. The controller must have the field's pack_info registered;
/// register_function does both steps in one call.
void register_function(Controller& c, const ScalarFunction& f);
void sync(Controller& c, const ScalarFunction& f, int level, std::span<const Direction> directions);
void sync_all(Controller& c, const ScalarFunction& f, int level);

} // namespace hytegrid
