#include "dlayer/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dlayer {

CompactSystem assemble_compact(const Partition& part, const Topology& topo)
{
    require_compatible(part, topo);

    std::vector<Matrix> cluster_a;
    std::vector<Matrix> agent_laplacians;
    std::vector<Vector> offsets;
    for (std::size_t i = 0; i < part.cluster_count(); ++i) {
        const ClusterBlock& cluster = part.clusters[i];
        std::vector<Matrix> blocks;
        for (const AgentBlock& agent : cluster.agents) {
            blocks.push_back(agent.a);
            offsets.push_back(agent.b);
        }
        cluster_a.push_back(block_diagonal(blocks));
        // Row: agents exchange z of dimension m_i. Column: agents exchange x of dimension n_i.
        agent_laplacians.push_back(lifted_laplacian(topo.agents[i], cluster.size));
    }

    CompactSystem cs;
    cs.scheme = part.scheme;
    cs.a_hat = block_diagonal(cluster_a);
    cs.b_hat = concat(offsets);
    cs.l_hat = block_diagonal(agent_laplacians);
    cs.l_hat_g = lifted_laplacian(topo.clusters, part.relay_dim());

    const Matrix at = cs.a_hat.transpose();
    const Matrix ata = at * cs.a_hat;
    if (part.scheme == Scheme::Row)
        cs.q = block2x2(-(ata + cs.l_hat_g), at * cs.l_hat, cs.a_hat, -cs.l_hat);
    else
        cs.q = block2x2(-(ata + cs.l_hat), at * cs.l_hat_g, cs.a_hat, -cs.l_hat_g);

    const Vector top = at * cs.b_hat;
    const Vector bottom = -1.0 * cs.b_hat;
    const Vector parts[] = {top, bottom};
    cs.drift = concat(parts);
    return cs;
}

namespace {

void require_psd(const Matrix& m, const char* name)
{
    if (!m.is_square())
        throw Error(ErrorKind::ShapeMismatch, std::string(name) + " is not square");
    const double tol = kPsdTolerance * (1.0 + m.norm_frobenius());
    if (symmetry_defect(m) > tol)
        throw Error(ErrorKind::NotPositiveSemidefinite, std::string(name) + " is not symmetric");
    const auto ev = eig_symmetric(m);
    if (!ev.empty() && ev.front() < -tol)
        throw Error(ErrorKind::NotPositiveSemidefinite,
                    std::string(name) + " has a negative eigenvalue " + std::to_string(ev.front()));
}

}  // namespace

void validate(const LemmaCheckInput& inp)
{
    if (inp.m2.rows() != inp.m1.cols() || inp.m2.cols() != inp.m1.cols())
        throw Error(ErrorKind::ShapeMismatch, "M2 must be square with the column count of M1");
    if (inp.m3.rows() != inp.m1.rows() || inp.m3.cols() != inp.m1.rows())
        throw Error(ErrorKind::ShapeMismatch, "M3 must be square with the row count of M1");
    require_psd(inp.m2, "M2");
    require_psd(inp.m3, "M3");
}

Matrix lemma_matrix(const LemmaCheckInput& inp)
{
    const Matrix m1t = inp.m1.transpose();
    return block2x2(-(m1t * inp.m1 + inp.m2), m1t * inp.m3, inp.m1, -inp.m3);
}

Matrix symmetrized_lemma_matrix(const LemmaCheckInput& inp)
{
    const std::size_t top = inp.m1.cols();
    const Matrix d = block2x2(Matrix::identity(top), Matrix(top, inp.m3.rows()),
                              Matrix(inp.m3.cols(), top), inp.m3.transpose());
    return d * lemma_matrix(inp);
}

SpectralVerdict spectral_verdict(const Matrix& m)
{
    SpectralVerdict v;
    v.spectrum = eig(m);
    v.scale = 1.0 + v.spectrum.norm2;
    v.max_real = v.spectrum.eigenvalues.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
    for (const auto& lambda : v.spectrum.eigenvalues) {
        v.max_imag = std::max(v.max_imag, std::abs(lambda.imag()));
        v.max_real = std::max(v.max_real, lambda.real());
    }
    const double tol = kSpectralTolerance * v.scale;
    v.real = v.max_imag < tol;
    v.nonpositive = v.max_real < tol;
    v.nondefective = v.spectrum.rank == v.spectrum.rank_squared;
    return v;
}

SpectralVerdict check_lemma1(const LemmaCheckInput& inp)
{
    validate(inp);
    return spectral_verdict(lemma_matrix(inp));
}

LemmaCheckInput lemma_operands(const CompactSystem& cs)
{
    if (cs.scheme == Scheme::Row)
        return {cs.a_hat, cs.l_hat_g, cs.l_hat};
    return {cs.a_hat, cs.l_hat, cs.l_hat_g};
}

SpectralVerdict check_q_spectrum(const CompactSystem& cs)
{
    const LemmaCheckInput ops = lemma_operands(cs);
    validate(ops);
    const Matrix expected = lemma_matrix(ops);
    if (expected.rows() != cs.q.rows() || expected.cols() != cs.q.cols() ||
        (expected - cs.q).norm_max() > 1e-12 * (1.0 + cs.q.norm_max()))
        throw Error(ErrorKind::ShapeMismatch, "Q does not match its Laplacian and A blocks");
    return spectral_verdict(cs.q);
}

Vector Certificate::stacked() const
{
    const Vector parts[] = {x, z};
    return concat(parts);
}

Certificate equilibrium_certificate(const CompactSystem& cs, const Partition& part)
{
    if (cs.scheme != part.scheme)
        throw Error(ErrorKind::ShapeMismatch, "compact system and partition use different schemes");
    const auto [a, b] = reassemble(part);
    const Vector y = solve_least_squares(a, b);
    const double residual = (a * y - b).norm();
    if (residual > kConsistencyTolerance * (1.0 + b.norm()))
        throw Error(ErrorKind::InconsistentSystem,
                    "Ax = b has no solution (least-squares residual " + std::to_string(residual) + ")");

    std::vector<Vector> replicas;
    for (const ClusterBlock& cluster : part.clusters) {
        if (part.scheme == Scheme::Row) {
            replicas.push_back(y);
        } else {
            const Vector yi = y.segment(cluster.offset, cluster.size);
            for (std::size_t j = 0; j < cluster.agents.size(); ++j)
                replicas.push_back(yi);
        }
    }

    Certificate cert;
    cert.x = concat(replicas);
    const Vector mismatch = cs.a_hat * cert.x - cs.b_hat;
    const Matrix& coupling = part.scheme == Scheme::Row ? cs.l_hat : cs.l_hat_g;
    cert.z = solve_least_squares(coupling, mismatch);
    return cert;
}

std::optional<Vector> flow_limit(const CompactSystem& cs, const Partition& part, const Vector& s0)
{
    if (s0.dim() != cs.q.cols())
        throw Error(ErrorKind::ShapeMismatch, "initial state has dimension " +
                                                  std::to_string(s0.dim()) + ", expected " +
                                                  std::to_string(cs.q.cols()));
    Vector equilibrium;
    try {
        equilibrium = equilibrium_certificate(cs, part).stacked();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InconsistentSystem)
            throw;
        return std::nullopt;
    }
    const auto projector = kernel_projector(cs.q);
    if (!projector)
        return std::nullopt;
    return equilibrium + *projector * (s0 - equilibrium);
}

}  // namespace dlayer
