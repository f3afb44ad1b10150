#include "hytegrid/function.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hytegrid {

namespace {

void check_level(const ScalarFunction& f, int level, const char* op) {
    if (level < f.min_level() || level > f.max_level())
        throw std::out_of_range(std::string(op) + ": level " + std::to_string(level) + " outside [" +
                                std::to_string(f.min_level()) + ", " + std::to_string(f.max_level()) +
                                "] of '" + f.name() + "'");
}

void check_pair(const char* op, const ScalarFunction& a, const ScalarFunction& b, int level) {
    check_level(a, level, op);
    check_level(b, level, op);
    if (&a.domain() != &b.domain())
        throw std::invalid_argument(std::string(op) + ": '" + a.name() + "' and '" + b.name() +
                                    "' live on different domains");
    if (a.kind() != b.kind())
        throw std::invalid_argument(std::string(op) + ": '" + a.name() + "' and '" + b.name() +
                                    "' have different function kinds");
    if (a.layout().scheme() != b.layout().scheme())
        throw std::invalid_argument(std::string(op) + ": '" + a.name() + "' and '" + b.name() +
                                    "' use different layout schemes");
}

Tag reduction_tag(int sender, int receiver, std::uint32_t channel) {
    return Tag{PrimitiveID{static_cast<std::uint64_t>(sender)},
               PrimitiveID{static_cast<std::uint64_t>(receiver)}, Direction::REDUCTION, channel};
}

/// Pairwise fold in list order; the tree shape depends only on the length.
double combine_tree(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    while (v.size() > 1) {
        std::vector<double> next;
        next.reserve(v.size() / 2 + 1);
        for (std::size_t i = 0; i + 1 < v.size(); i += 2)
            next.push_back(v[i] + v[i + 1]);
        if (v.size() % 2 != 0)
            next.push_back(v.back());
        v = std::move(next);
    }
    return v.front();
}

/// All-reduce over one partial value per primitive: every rank reports a
/// partial for each of its primitives, rank 0 collects them keyed by ID (so
/// the combine input lists every primitive of the domain in ID order, zero
/// partials included, and the reduction is independent of the partitioning),
/// and the single result is broadcast back so every rank holds the same
/// value.
double all_reduce(DistributedDomain& dom, std::uint32_t channel,
                  const std::function<double(const Primitive&)>& partial,
                  const std::function<double(std::vector<double>)>& combine) {
    Transport& tr = dom.transport();
    std::map<PrimitiveID, double> partials;
    for (int r = 0; r < dom.ranks(); ++r) {
        MessageBuffer msg;
        if (r != 0)
            msg.put_u64(dom.graph(r).local.size());
        for (const auto& [id, p] : dom.graph(r).local) {
            const double s = partial(p);
            if (r == 0) {
                partials.emplace(id, s);
            } else {
                msg.put_u64(id.value);
                msg.put_f64(s);
            }
        }
        if (r != 0)
            tr.send(r, 0, reduction_tag(r, 0, channel), std::move(msg));
    }
    for (int r = 1; r < dom.ranks(); ++r) {
        auto rec = tr.receive(0, reduction_tag(r, 0, channel));
        const std::uint64_t count = rec.buffer.get_u64();
        for (std::uint64_t i = 0; i < count; ++i) {
            const PrimitiveID id{rec.buffer.get_u64()};
            const double s = rec.buffer.get_f64();
            if (!partials.emplace(id, s).second)
                throw std::runtime_error("all_reduce: primitive " + std::to_string(id.value) +
                                         " reported a partial twice");
        }
        if (!rec.buffer.fully_consumed())
            throw std::runtime_error("all_reduce: trailing bytes in partial report of rank " +
                                     std::to_string(r));
    }
    std::vector<double> ordered;
    ordered.reserve(partials.size());
    for (const auto& [id, s] : partials)
        ordered.push_back(s);
    const double result = combine(std::move(ordered));
    for (int r = 1; r < dom.ranks(); ++r) {
        MessageBuffer msg;
        msg.put_f64(result);
        tr.send(0, r, reduction_tag(0, r, channel), std::move(msg));
    }
    for (int r = 1; r < dom.ranks(); ++r) {
        auto rec = tr.receive(r, reduction_tag(0, r, channel));
        if (rec.buffer.get_f64() != result || !rec.buffer.fully_consumed())
            throw std::runtime_error("all_reduce: broadcast to rank " + std::to_string(r) + " corrupted");
    }
    return result;
}

} // namespace

ScalarFunction::ScalarFunction(std::string name, DistributedDomain& domain, FunctionKind kind,
                               int min_level, int max_level, BoundaryConditions bc,
                               TriangleLayout layout)
    : name_(std::move(name)), domain_(&domain), kind_(kind), min_level_(min_level),
      max_level_(max_level), bc_(std::move(bc)), layout_(layout) {
    if (min_level_ < 0 || max_level_ < min_level_)
        throw std::invalid_argument("ScalarFunction '" + name_ + "': bad level range [" +
                                    std::to_string(min_level_) + ", " + std::to_string(max_level_) + "]");
    handle_ = domain.add_data(domain.allocate_channel(),
                              field_callbacks(kind_, min_level_, max_level_, bc_, layout_));
    pack_info_ = std::make_shared<FieldPackInfo>(handle_, kind_, layout_);
}

std::vector<double>& ScalarFunction::values(PrimitiveID id, int level) {
    return field_values(domain_->primitive(id), handle_, level);
}

const std::vector<double>& ScalarFunction::values(PrimitiveID id, int level) const {
    return field_values(domain_->primitive(id), handle_, level);
}

const std::vector<std::uint8_t>& ScalarFunction::flags(PrimitiveID id, int level) const {
    return field_flags(domain_->primitive(id), handle_, level);
}

void interpolate(ScalarFunction& f, const std::function<double(double, double)>& expr, int level,
                 std::uint8_t flag_mask) {
    check_level(f, level, "interpolate");
    DistributedDomain& dom = f.domain();
    for (int r = 0; r < dom.ranks(); ++r) {
        for (auto& [id, p] : dom.graph(r).local) {
            auto& vals = field_values(p, f.handle(), level);
            const auto& fl = field_flags(p, f.handle(), level);
            for_each_owned_coord(f.kind(), p.kind, p.info, level, f.layout(),
                                 [&](std::size_t i, double x, double y) {
                                     if ((fl.at(i) & flag_mask) != 0)
                                         vals.at(i) = expr(x, y);
                                 });
        }
    }
}

void assign(double alpha, const ScalarFunction& x1, double beta, const ScalarFunction& x2,
            ScalarFunction& dst, int level, std::uint8_t flag_mask) {
    check_pair("assign", x1, x2, level);
    check_pair("assign", x1, dst, level);
    DistributedDomain& dom = dst.domain();
    for (int r = 0; r < dom.ranks(); ++r) {
        for (auto& [id, p] : dom.graph(r).local) {
            const auto& a = field_values(p, x1.handle(), level);
            const auto& b = field_values(p, x2.handle(), level);
            auto& out = field_values(p, dst.handle(), level);
            const auto& fl = field_flags(p, dst.handle(), level);
            for_each_owned(dst.kind(), p.kind, p.info, level, dst.layout(), [&](std::size_t i) {
                if ((fl.at(i) & flag_mask) != 0)
                    out.at(i) = alpha * a.at(i) + beta * b.at(i);
            });
        }
    }
}

void add_scaled(ScalarFunction& dst, double gamma, const ScalarFunction& y, int level,
                std::uint8_t flag_mask) {
    check_pair("add_scaled", dst, y, level);
    DistributedDomain& dom = dst.domain();
    for (int r = 0; r < dom.ranks(); ++r) {
        for (auto& [id, p] : dom.graph(r).local) {
            const auto& a = field_values(p, y.handle(), level);
            auto& out = field_values(p, dst.handle(), level);
            const auto& fl = field_flags(p, dst.handle(), level);
            for_each_owned(dst.kind(), p.kind, p.info, level, dst.layout(), [&](std::size_t i) {
                if ((fl.at(i) & flag_mask) != 0)
                    out.at(i) += gamma * a.at(i);
            });
        }
    }
}

double dot(const ScalarFunction& x1, const ScalarFunction& x2, int level) {
    check_pair("dot", x1, x2, level);
    DistributedDomain& dom = x1.domain();
    return all_reduce(
        dom, x1.channel(),
        [&](const Primitive& p) {
            const auto& a = field_values(p, x1.handle(), level);
            const auto& b = field_values(p, x2.handle(), level);
            double s = 0.0;
            for_each_owned(x1.kind(), p.kind, p.info, level, x1.layout(),
                           [&](std::size_t i) { s += a.at(i) * b.at(i); });
            return s;
        },
        combine_tree);
}

double norm2(const ScalarFunction& f, int level) { return std::sqrt(dot(f, f, level)); }

double max_abs(const ScalarFunction& f, int level) {
    check_level(f, level, "max_abs");
    DistributedDomain& dom = f.domain();
    return all_reduce(
        dom, f.channel(),
        [&](const Primitive& p) {
            const auto& a = field_values(p, f.handle(), level);
            double m = 0.0;
            for_each_owned(f.kind(), p.kind, p.info, level, f.layout(),
                           [&](std::size_t i) { m = std::max(m, std::abs(a.at(i))); });
            return m;
        },
        [](std::vector<double> v) {
            double m = 0.0;
            for (const double s : v)
                m = std::max(m, s);
            return m;
        });
}

void register_function(Controller& c, const ScalarFunction& f) {
    c.register_pack_info(f.channel(), f.pack_info());
}

void sync(Controller& c, const ScalarFunction& f, int level, std::span<const Direction> directions) {
    check_level(f, level, "sync");
    c.sync(f.channel(), level, directions);
}

void sync_all(Controller& c, const ScalarFunction& f, int level) {
    sync(c, f, level, full_sync_schedule(f.kind()));
}

} // namespace hytegrid
