#include <doctest.h>

#include "support.hpp"

using namespace dlayer;
using testing::make_instance;
using testing::max_diff;
using testing::throws_kind;

TEST_CASE("selection matrices")
{
    const std::size_t whole[] = {3};
    CHECK(selection_matrices(whole, 3).front() == Matrix::identity(3));

    const std::size_t split[] = {2, 1};
    const auto e = selection_matrices(split, 3);
    CHECK(e[0] == Matrix{{1, 0, 0}, {0, 1, 0}});
    CHECK(e[1] == Matrix{{0, 0, 1}});
    CHECK(vstack(e) == Matrix::identity(3));

    const std::size_t wrong[] = {2, 2};
    CHECK(throws_kind(ErrorKind::SumMismatch, [&] { selection_matrices(wrong, 3); }));
    const std::size_t empty_band[] = {3, 0};
    CHECK(throws_kind(ErrorKind::LayoutMismatch, [&] { selection_matrices(empty_band, 3); }));
}

TEST_CASE("selection matrices resolve the identity")
{
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t total = 1 + trial % 9;
        const auto sizes = random_composition(total, 1 + trial % total, rng);
        Matrix sum(total, total);
        for (const Matrix& e : selection_matrices(sizes, total))
            sum += e.transpose() * e;
        CHECK(sum == Matrix::identity(total));
    }
}

TEST_CASE("row partition of the identity")
{
    const auto inst =
        make_instance(Scheme::Row, Matrix::identity(2), Vector{1.0, 1.0}, Layout{{1, 1}, {{1, 1}, {1, 1}}});
    const Partition p = partition_rows(inst);
    REQUIRE(p.cluster_count() == 2);
    CHECK(p.clusters[0].agents[0].a == Matrix{{1.0}});
    CHECK(p.clusters[0].agents[1].a == Matrix{{0.0}});
    CHECK(p.clusters[1].agents[1].a == Matrix{{1.0}});
    for (const auto& c : p.clusters)
        for (const auto& a : c.agents)
            CHECK(a.b == Vector{0.5});
    CHECK(p.x_dim(0, 1) == 1);
    CHECK(p.z_dim(0, 1) == 1);
}

TEST_CASE("column partition of the identity")
{
    const auto inst = make_instance(Scheme::Column, Matrix::identity(2), Vector{1.0, 1.0},
                                    Layout{{1, 1}, {{1, 1}, {1, 1}}});
    const Partition p = partition_columns(inst);
    CHECK(p.clusters[0].agents[0].a == Matrix{{1.0}});
    CHECK(p.clusters[0].agents[1].a == Matrix{{0.0}});
    CHECK(p.clusters[1].agents[0].a == Matrix{{0.0}});
    CHECK(p.clusters[1].agents[1].a == Matrix{{1.0}});
    CHECK(p.clusters[0].b == Vector{0.5, 0.5});
    CHECK(p.clusters[0].agents[1].b == Vector{0.5});
}

TEST_CASE("scalar layouts give 1x1 blocks")
{
    Rng rng(4);
    const Matrix a = random_matrix(3, 4, rng);
    const Vector b = random_vector(3, rng);
    const Layout row_layout{{1, 1, 1}, {{1, 1, 1, 1}, {1, 1, 1, 1}, {1, 1, 1, 1}}};
    for (const auto& c : partition_rows(make_instance(Scheme::Row, a, b, row_layout)).clusters)
        for (const auto& blk : c.agents) {
            CHECK(blk.a.rows() == 1);
            CHECK(blk.a.cols() == 1);
            CHECK(blk.b.dim() == 1);
        }
    const Layout col_layout{{1, 1, 1, 1}, {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}}};
    for (const auto& c : partition_columns(make_instance(Scheme::Column, a, b, col_layout)).clusters)
        for (const auto& blk : c.agents) {
            CHECK(blk.a.rows() == 1);
            CHECK(blk.a.cols() == 1);
            CHECK(blk.b.dim() == 1);
        }
}

TEST_CASE("layout validation")
{
    const Matrix a(3, 2, 1.0);
    const Vector b(3);
    SUBCASE("row sums")
    {
        CHECK(throws_kind(ErrorKind::LayoutMismatch, [&] {
            partition_rows(make_instance(Scheme::Row, a, b, Layout{{1, 1}, {{2}, {2}}}));
        }));
        CHECK(throws_kind(ErrorKind::LayoutMismatch, [&] {
            partition_rows(make_instance(Scheme::Row, a, b, Layout{{2, 1}, {{1}, {2}}}));
        }));
        CHECK(throws_kind(ErrorKind::LayoutMismatch, [&] {
            partition_rows(make_instance(Scheme::Row, a, b, Layout{{3, 0}, {{2}, {2}}}));
        }));
    }
    SUBCASE("column sums")
    {
        CHECK(throws_kind(ErrorKind::LayoutMismatch, [&] {
            partition_columns(make_instance(Scheme::Column, a, b, Layout{{1, 1}, {{3}, {2}}}));
        }));
    }
    SUBCASE("agent counts must match the topology")
    {
        auto inst = make_instance(Scheme::Row, a, b, Layout{{2, 1}, {{1, 1}, {2}}});
        inst.layout.agent_sizes[1] = {1, 1};
        CHECK(throws_kind(ErrorKind::TopologyMismatch, [&] { partition_rows(inst); }));
    }
    SUBCASE("b dimension")
    {
        CHECK(throws_kind(ErrorKind::ShapeMismatch, [&] {
            partition_rows(make_instance(Scheme::Row, a, Vector(2), Layout{{2}, {{2}}}));
        }));
    }
}

TEST_CASE("explicit offsets")
{
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const Vector b{3.0, 7.0};
    auto inst = make_instance(Scheme::Row, a, b, Layout{{2}, {{1, 1}}});
    inst.offsets = Offsets{{Vector{1.0, 2.0}, Vector{2.0, 5.0}}};
    const Partition p = partition_rows(inst);
    CHECK(p.clusters[0].agents[1].b == Vector{2.0, 5.0});

    inst.offsets = Offsets{{Vector{1.0, 2.0}, Vector{2.0, 4.0}}};
    CHECK(throws_kind(ErrorKind::SumMismatch, [&] { partition_rows(inst); }));

    auto col = make_instance(Scheme::Column, a, b, Layout{{1, 1}, {{2}, {1, 1}}});
    col.offsets = Offsets{{Vector{1.0, 3.0}}, {Vector{2.0}, Vector{4.0}}};
    CHECK(partition_columns(col).clusters[1].b == Vector{2.0, 4.0});
    col.offsets = Offsets{{Vector{1.0, 3.0}}, {Vector{2.0}, Vector{5.0}}};
    CHECK(throws_kind(ErrorKind::SumMismatch, [&] { partition_columns(col); }));
}

TEST_CASE("partition round trip on random instances")
{
    Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        for (Scheme scheme : {Scheme::Row, Scheme::Column}) {
            const ProblemInstance inst = random_instance(scheme, InstanceLimits{}, rng);
            const Partition p = make_partition(inst);
            const auto [a, b] = reassemble(p);
            CHECK(a == inst.a);
            if (scheme == Scheme::Row) {
                CHECK(b == inst.b);
                for (const auto& c : p.clusters) {
                    // b_i split across agents; x_ij = E_ij x_i
                    Vector sum(c.size);
                    for (const auto& blk : c.agents)
                        sum += blk.b;
                    CHECK(max_diff(sum, c.b) <= 1e-15 * (1.0 + c.b.norm()));
                    Matrix ai(c.size, p.cols);
                    for (const auto& blk : c.agents) {
                        ai.set_block(0, blk.offset, blk.a);
                        const Vector xi = random_vector(p.cols, rng);
                        CHECK(blk.selection * xi == xi.segment(blk.offset, blk.size));
                    }
                    for (const auto& blk : c.agents)
                        CHECK(ai * blk.selection.transpose() == blk.a);
                }
            } else {
                CHECK(max_diff(b, inst.b) <= 1e-15 * (1.0 + inst.b.norm()) * p.cluster_count());
                for (const auto& c : p.clusters) {
                    const Matrix ai = inst.a.block(0, c.offset, p.rows, c.size);
                    for (const auto& blk : c.agents) {
                        CHECK(blk.selection * ai == blk.a);
                        CHECK(blk.b == c.b.segment(blk.offset, blk.size));
                    }
                }
            }
        }
    }
}

TEST_CASE("heterogeneous layouts keep the invariants")
{
    Rng rng(6);
    const Matrix a = random_matrix(5, 7, rng);
    const Vector b = random_vector(5, rng);
    const Layout layout{{2, 1, 2}, {{3, 1, 3}, {2, 5}, {1, 2, 4}}};
    const Partition p = make_partition(make_instance(Scheme::Row, a, b, layout));
    CHECK(p.x_dim(0, 0) == 3);
    CHECK(p.x_dim(0, 1) == 1);
    CHECK(p.x_dim(2, 2) == 4);
    CHECK(reassemble(p).first == a);
    CHECK(reassemble(p).second == b);
}
