#include "dlayer/dynamics.hpp"

#include <algorithm>
#include <string>

namespace dlayer {

NetworkState zero_state(const Partition& part)
{
    NetworkState s;
    s.x.resize(part.cluster_count());
    s.z.resize(part.cluster_count());
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            s.x[i].emplace_back(part.x_dim(i, j));
            s.z[i].emplace_back(part.z_dim(i, j));
        }
    return s;
}

void require_shape(const Partition& part, const NetworkState& s)
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ShapeMismatch, what); };
    if (s.x.size() != part.cluster_count() || s.z.size() != part.cluster_count())
        fail("state cluster count does not match the partition");
    for (std::size_t i = 0; i < part.cluster_count(); ++i) {
        if (s.x[i].size() != part.agent_count(i) || s.z[i].size() != part.agent_count(i))
            fail("state agent count of cluster " + std::to_string(i) + " does not match");
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            if (s.x[i][j].dim() != part.x_dim(i, j))
                fail("x of agent (" + std::to_string(i) + "," + std::to_string(j) + ") has dimension " +
                     std::to_string(s.x[i][j].dim()) + ", expected " + std::to_string(part.x_dim(i, j)));
            if (s.z[i][j].dim() != part.z_dim(i, j))
                fail("z of agent (" + std::to_string(i) + "," + std::to_string(j) + ") has dimension " +
                     std::to_string(s.z[i][j].dim()) + ", expected " + std::to_string(part.z_dim(i, j)));
        }
    }
}

namespace {

void append(std::vector<double>& out, const AgentVectors& v)
{
    for (const auto& cluster : v)
        for (const Vector& agent : cluster)
            out.insert(out.end(), agent.std().begin(), agent.std().end());
}

Vector stack_pair(const AgentVectors& x, const AgentVectors& z)
{
    std::vector<double> out;
    append(out, x);
    append(out, z);
    return Vector(std::move(out));
}

}  // namespace

Vector stack(const NetworkState& s) { return stack_pair(s.x, s.z); }
Vector stack(const StateDerivative& d) { return stack_pair(d.dx, d.dz); }

NetworkState unstack(const Partition& part, const Vector& xz, double time)
{
    if (xz.dim() != part.stacked_x_dim() + part.stacked_z_dim())
        throw Error(ErrorKind::ShapeMismatch, "stacked state has dimension " +
                                                  std::to_string(xz.dim()) + ", expected " +
                                                  std::to_string(part.stacked_x_dim() +
                                                                 part.stacked_z_dim()));
    NetworkState s;
    s.time = time;
    s.x.resize(part.cluster_count());
    s.z.resize(part.cluster_count());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            s.x[i].push_back(xz.segment(pos, part.x_dim(i, j)));
            pos += part.x_dim(i, j);
        }
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            s.z[i].push_back(xz.segment(pos, part.z_dim(i, j)));
            pos += part.z_dim(i, j);
        }
    return s;
}

namespace {

Vector relay_of(const Partition& part, const NetworkState& s, std::size_t cluster)
{
    const AgentVectors& source = part.scheme == Scheme::Row ? s.x : s.z;
    return concat(source[cluster]);
}

}  // namespace

std::vector<Vector> cluster_relay(const Partition& part, const NetworkState& s)
{
    std::vector<Vector> out;
    out.reserve(part.cluster_count());
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        out.push_back(relay_of(part, s, i));
    return out;
}

namespace {

// r = A x - b - sum_p (z - zp_p), dz = r, dx = -A' r - sum_q (x - xp_q).
// Peer vectors have the length of z (z peers) or x (x peers).
void flow_kernel(const Matrix& a, std::span<const double> b, const double* x, const double* z,
                 std::span<const double* const> z_peers, std::span<const double* const> x_peers,
                 double* dx, double* dz)
{
    const std::size_t nz = a.rows();
    const std::size_t nx = a.cols();
    for (std::size_t p = 0; p < nz; ++p) {
        double r = 0.0;
        for (std::size_t c = 0; c < nx; ++c)
            r += a(p, c) * x[c];
        r -= b[p];
        for (const double* zp : z_peers)
            r = r - z[p] + zp[p];
        dz[p] = r;
    }
    for (std::size_t c = 0; c < nx; ++c)
        dx[c] = 0.0;
    for (std::size_t p = 0; p < nz; ++p)
        for (std::size_t c = 0; c < nx; ++c)
            dx[c] -= a(p, c) * dz[p];
    for (const double* xp : x_peers)
        for (std::size_t c = 0; c < nx; ++c)
            dx[c] = dx[c] - x[c] + xp[c];
}

std::vector<const double*> data_of(std::span<const Vector> vs)
{
    std::vector<const double*> out;
    for (const Vector& v : vs)
        out.push_back(v.values().data());
    return out;
}

}  // namespace

AgentDerivative local_flow(const Matrix& a, const Vector& b, const Vector& x, const Vector& z,
                           std::span<const Vector> z_peers, std::span<const Vector> x_peers)
{
    if (a.rows() != b.dim() || a.rows() != z.dim() || a.cols() != x.dim())
        throw Error(ErrorKind::ShapeMismatch, "local flow operands disagree in dimension");
    for (const Vector& p : z_peers)
        if (p.dim() != z.dim())
            throw Error(ErrorKind::ShapeMismatch, "z peer dimension differs from z");
    for (const Vector& p : x_peers)
        if (p.dim() != x.dim())
            throw Error(ErrorKind::ShapeMismatch, "x peer dimension differs from x");

    AgentDerivative d{Vector(x.dim()), Vector(z.dim())};
    flow_kernel(a, b.values(), x.values().data(), z.values().data(), data_of(z_peers),
                data_of(x_peers), d.dx.values().data(), d.dz.values().data());
    return d;
}

AgentNetwork::AgentNetwork(const Partition& part, const Topology& topo)
{
    require_compatible(part, topo);
    x_dim_ = part.stacked_x_dim();
    z_dim_ = part.stacked_z_dim();

    // Start of each agent's x and z, and of each cluster's relayed stack.
    std::vector<std::vector<std::size_t>> x_off(part.cluster_count()), z_off(part.cluster_count());
    std::vector<std::size_t> relay_start(part.cluster_count());
    std::size_t xpos = 0, zpos = x_dim_;
    for (std::size_t i = 0; i < part.cluster_count(); ++i) {
        relay_start[i] = part.scheme == Scheme::Row ? xpos : zpos;
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            x_off[i].push_back(xpos);
            z_off[i].push_back(zpos);
            xpos += part.x_dim(i, j);
            zpos += part.z_dim(i, j);
        }
    }

    agents_.resize(part.cluster_count());
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        for (std::size_t j = 0; j < part.agent_count(i); ++j) {
            Wiring w{&part.clusters[i].agents[j], x_off[i][j], z_off[i][j], {}, {}};
            const auto& peer_off = part.scheme == Scheme::Row ? z_off[i] : x_off[i];
            std::vector<std::size_t> within, relayed;
            for (std::size_t k : topo.agents[i].neighbors(j))
                within.push_back(peer_off[k]);
            // Cluster i slices E_ij out of each neighbor's relayed stack.
            for (std::size_t k : topo.clusters.neighbors(i))
                relayed.push_back(relay_start[k] + w.block->offset);
            if (part.scheme == Scheme::Row) {
                w.z_peers = std::move(within);
                w.x_peers = std::move(relayed);
            } else {
                w.z_peers = std::move(relayed);
                w.x_peers = std::move(within);
            }
            agents_[i].push_back(std::move(w));
        }
}

std::size_t AgentNetwork::x_offset(std::size_t cluster, std::size_t agent) const
{
    return agents_.at(cluster).at(agent).x_off;
}

std::size_t AgentNetwork::z_offset(std::size_t cluster, std::size_t agent) const
{
    return agents_.at(cluster).at(agent).z_off;
}

void AgentNetwork::evaluate_one(const Wiring& w, const double* xz, double* dxz,
                                std::vector<const double*>& zp,
                                std::vector<const double*>& xp) const
{
    zp.clear();
    xp.clear();
    for (std::size_t off : w.z_peers)
        zp.push_back(xz + off);
    for (std::size_t off : w.x_peers)
        xp.push_back(xz + off);
    flow_kernel(w.block->a, w.block->b.values(), xz + w.x_off, xz + w.z_off, zp, xp,
                dxz + w.x_off, dxz + w.z_off);
}

void AgentNetwork::evaluate(std::span<const double> xz, std::span<double> dxz) const
{
    if (xz.size() != state_dim() || dxz.size() != state_dim())
        throw Error(ErrorKind::ShapeMismatch, "stacked state has dimension " +
                                                  std::to_string(xz.size()) + ", expected " +
                                                  std::to_string(state_dim()));
    std::vector<const double*> zp, xp;
    for (const auto& cluster : agents_)
        for (const Wiring& w : cluster)
            evaluate_one(w, xz.data(), dxz.data(), zp, xp);
}

void AgentNetwork::evaluate_agent(std::size_t cluster, std::size_t agent,
                                  std::span<const double> xz, std::span<double> dxz) const
{
    if (xz.size() != state_dim() || dxz.size() != state_dim())
        throw Error(ErrorKind::ShapeMismatch, "stacked state has dimension " +
                                                  std::to_string(xz.size()) + ", expected " +
                                                  std::to_string(state_dim()));
    std::vector<const double*> zp, xp;
    evaluate_one(agents_.at(cluster).at(agent), xz.data(), dxz.data(), zp, xp);
}

AgentDerivative agent_derivative(const Partition& part, const Topology& topo,
                                 const NetworkState& s, std::size_t cluster, std::size_t agent)
{
    require_shape(part, s);
    const AgentNetwork net(part, topo);
    const Vector xz = stack(s);
    std::vector<double> dxz(net.state_dim(), 0.0);
    net.evaluate_agent(cluster, agent, xz.values(), dxz);

    const std::size_t xo = net.x_offset(cluster, agent);
    const std::size_t zo = net.z_offset(cluster, agent);
    const auto begin = dxz.begin();
    return {Vector(std::vector<double>(begin + xo, begin + xo + part.x_dim(cluster, agent))),
            Vector(std::vector<double>(begin + zo, begin + zo + part.z_dim(cluster, agent)))};
}

StateDerivative agent_update(const Partition& part, const Topology& topo, const NetworkState& s)
{
    require_shape(part, s);
    const AgentNetwork net(part, topo);
    std::vector<double> dxz(net.state_dim());
    net.evaluate(stack(s).values(), dxz);
    NetworkState d = unstack(part, Vector(std::move(dxz)));
    return {std::move(d.x), std::move(d.z)};
}

StateDerivative agent_update_row(const Partition& part, const Topology& topo, const NetworkState& s)
{
    if (part.scheme != Scheme::Row)
        throw Error(ErrorKind::ShapeMismatch, "agent_update_row needs a row partition");
    return agent_update(part, topo, s);
}

StateDerivative agent_update_col(const Partition& part, const Topology& topo, const NetworkState& s)
{
    if (part.scheme != Scheme::Column)
        throw Error(ErrorKind::ShapeMismatch, "agent_update_col needs a column partition");
    return agent_update(part, topo, s);
}

// ---------------------------------------------------------------- residuals

double ResidualReport::max_conservation() const
{
    return conservation.empty() ? 0.0 : *std::max_element(conservation.begin(), conservation.end());
}

double ResidualReport::max_consensus() const
{
    return consensus.empty() ? 0.0 : *std::max_element(consensus.begin(), consensus.end());
}

bool ResidualReport::within(double tol) const
{
    return max_conservation() < tol && max_consensus() < tol && overall < tol;
}

namespace {

Vector mean_of(std::span<const Vector> vs)
{
    Vector m = vs.front();
    for (std::size_t k = 1; k < vs.size(); ++k)
        m += vs[k];
    m *= 1.0 / static_cast<double>(vs.size());
    return m;
}

double max_pairwise_distance(std::span<const Vector> vs)
{
    double d = 0.0;
    for (std::size_t p = 0; p < vs.size(); ++p)
        for (std::size_t q = p + 1; q < vs.size(); ++q)
            d = std::max(d, (vs[p] - vs[q]).norm());
    return d;
}

}  // namespace

namespace {

// ||A x - b|| assembled block by block, without forming A.
double overall_residual(const Partition& part, const Vector& x)
{
    Vector r(part.rows);
    for (const ClusterBlock& cluster : part.clusters) {
        for (const AgentBlock& agent : cluster.agents) {
            const std::size_t row0 = part.scheme == Scheme::Row ? cluster.offset : agent.offset;
            const std::size_t col0 = part.scheme == Scheme::Row ? agent.offset : cluster.offset;
            for (std::size_t p = 0; p < agent.a.rows(); ++p) {
                double acc = 0.0;
                for (std::size_t c = 0; c < agent.a.cols(); ++c)
                    acc += agent.a(p, c) * x[col0 + c];
                r[row0 + p] += acc;
            }
        }
        if (part.scheme == Scheme::Row)
            for (std::size_t p = 0; p < cluster.size; ++p)
                r[cluster.offset + p] -= cluster.b[p];
        else
            r -= cluster.b;
    }
    return r.norm();
}

}  // namespace

Vector reassembled_solution(const Partition& part, const NetworkState& s)
{
    require_shape(part, s);
    if (part.scheme == Scheme::Row) {
        const std::vector<Vector> stacks = cluster_relay(part, s);
        return mean_of(stacks);
    }
    std::vector<Vector> means;
    for (std::size_t i = 0; i < part.cluster_count(); ++i)
        means.push_back(mean_of(s.x[i]));
    return concat(means);
}

ResidualReport residuals(const Partition& part, const Topology& topo, const NetworkState& s)
{
    require_compatible(part, topo);
    require_shape(part, s);

    ResidualReport rep;
    rep.scheme = part.scheme;
    if (part.scheme == Scheme::Row) {
        for (std::size_t i = 0; i < part.cluster_count(); ++i) {
            Vector sum(part.clusters[i].size);
            for (std::size_t j = 0; j < part.agent_count(i); ++j) {
                const AgentBlock& blk = part.clusters[i].agents[j];
                sum += blk.a * s.x[i][j] - blk.b;
            }
            rep.conservation.push_back(sum.norm());
        }
        const std::vector<Vector> stacks = cluster_relay(part, s);
        rep.consensus.push_back(max_pairwise_distance(stacks));
    } else {
        Vector sum(part.rows);
        for (std::size_t i = 0; i < part.cluster_count(); ++i) {
            for (std::size_t j = 0; j < part.agent_count(i); ++j) {
                const AgentBlock& blk = part.clusters[i].agents[j];
                Vector local = blk.a * s.x[i][j] - blk.b;
                for (std::size_t r = 0; r < blk.size; ++r)
                    sum[blk.offset + r] += local[r];
            }
            rep.consensus.push_back(max_pairwise_distance(s.x[i]));
        }
        rep.conservation.push_back(sum.norm());
    }

    rep.solution = reassembled_solution(part, s);
    rep.overall = overall_residual(part, rep.solution);
    return rep;
}

}  // namespace dlayer
