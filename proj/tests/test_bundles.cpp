#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "vbd/bundles.hpp"

using namespace vbd;

namespace {

double projector_defect(const ProjectorBundle& e) {
  double dev = 0.0;
  for (std::size_t node = 0; node < e.base()->node_count(); ++node) {
    const Mat p = e.proj_mat(node);
    dev = std::max(dev, max_abs(p * p - p));
    dev = std::max(dev, max_abs(p - transpose(p)));
  }
  return dev;
}

}  // namespace

TEST_CASE("trivial bundle is the identity projector") {
  const ManifoldPtr m = make_circle(16);
  const BundlePtr e = trivial_bundle(m, 3);
  CHECK(e->ambient_dim() == 3);
  CHECK(e->rank() == 3);
  CHECK_FALSE(e->is_dual());
  for (std::size_t node = 0; node < m->node_count(); ++node)
    CHECK(max_abs(e->proj_mat(node) - Mat::identity(3)) == 0.0);
}

TEST_CASE("twisted line bundle projector values") {
  const ManifoldPtr m = make_circle(128);
  const BundlePtr e = mobius(m);
  CHECK(e->ambient_dim() == 2);
  CHECK(e->rank() == 1);
  // At t=0 the fiber is span{(1,0)}.
  CHECK(max_abs(e->proj_mat(0) - Mat(2, 2, {1, 0, 0, 0})) <= 1e-15);
  // At t=pi/2 (node 32) the half-angle frame gives the all-halves matrix;
  // at t=pi (node 64) the fiber has rotated to span{(0,1)}.
  CHECK(max_abs(e->proj_mat(32) - Mat(2, 2, {0.5, 0.5, 0.5, 0.5})) <= 1e-15);
  CHECK(max_abs(e->proj_mat(64) - Mat(2, 2, {0, 0, 0, 1})) <= 1e-15);
  CHECK(projector_defect(*e) <= 1e-15);
}

TEST_CASE("complement resolves the identity and is involutive") {
  const ManifoldPtr m = make_circle(64);
  const BundlePtr e = mobius(m);
  const BundlePtr c = complement(e);
  CHECK(c->rank() == 1);
  const BundlePtr cc = complement(c);
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    CHECK(max_abs(e->proj_mat(node) + c->proj_mat(node) - Mat::identity(2)) <= 1e-15);
    CHECK(max_abs(cc->proj_mat(node) - e->proj_mat(node)) <= 1e-15);
  }
}

TEST_CASE("dual flips parity and keeps the projector field") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  const BundlePtr d = dual(e);
  CHECK(d->is_dual());
  CHECK_FALSE(dual(d)->is_dual());
  for (std::size_t node = 0; node < m->node_count(); ++node)
    CHECK(max_abs(d->proj_mat(node) - e->proj_mat(node)) == 0.0);
}

TEST_CASE("whitney sum stacks blocks and adds ranks") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr a = mobius(m);
  const BundlePtr b = trivial_bundle(m, 1);
  const BundlePtr s = whitney_sum(a, b);
  CHECK(s->ambient_dim() == 3);
  CHECK(s->rank() == 2);
  const Mat p = s->proj_mat(5);
  const Mat pa = a->proj_mat(5);
  CHECK(p(0, 0) == pa(0, 0));
  CHECK(p(0, 1) == pa(0, 1));
  CHECK(p(2, 2) == 1.0);
  CHECK(p(0, 2) == 0.0);
  CHECK(p(2, 0) == 0.0);
  CHECK_THROWS_AS(whitney_sum(a, dual(b)), std::invalid_argument);
}

TEST_CASE("tensor bundle is the kronecker projector") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr a = mobius(m);
  const BundlePtr t = tensor(a, a);
  CHECK(t->ambient_dim() == 4);
  CHECK(t->rank() == 1);
  for (std::size_t node = 0; node < m->node_count(); node += 7)
    CHECK(max_abs(t->proj_mat(node) - kron(a->proj_mat(node), a->proj_mat(node))) <= 1e-15);
}

TEST_CASE("external tensor lives on the product grid") {
  const ManifoldPtr ma = make_circle(16);
  const ManifoldPtr mb = make_circle(8);
  const BundlePtr a = mobius(ma);
  const BundlePtr b = trivial_bundle(mb, 2);
  const BundlePtr x = external_tensor(a, b);
  CHECK(x->base()->dim() == 2);
  CHECK(x->base()->node_count() == 128);
  CHECK(x->ambient_dim() == 4);
  CHECK(x->rank() == 2);
  const std::size_t idx[2] = {3, 5};
  const std::size_t node = x->base()->flat_index(idx);
  CHECK(max_abs(x->proj_mat(node) - kron(a->proj_mat(3), b->proj_mat(5))) <= 1e-15);
}

TEST_CASE("constructor rejects non-projector fields") {
  const ManifoldPtr m = make_circle(8);
  // Not idempotent.
  std::vector<double> notidem(m->node_count() * 4);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    notidem[n * 4 + 0] = 2.0;
    notidem[n * 4 + 3] = 0.0;
  }
  CHECK_THROWS_AS(ProjectorBundle(m, 2, notidem, false), std::invalid_argument);
  // Not symmetric (a non-orthogonal idempotent).
  std::vector<double> notsym(m->node_count() * 4);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    notsym[n * 4 + 0] = 1.0;
    notsym[n * 4 + 1] = 1.0;
  }
  CHECK_THROWS_AS(ProjectorBundle(m, 2, notsym, false), std::invalid_argument);
  // Rank jumps between nodes.
  std::vector<double> rankjump(m->node_count() * 4, 0.0);
  for (std::size_t n = 0; n < m->node_count(); ++n) {
    rankjump[n * 4 + 0] = 1.0;
    rankjump[n * 4 + 3] = n == 0 ? 1.0 : 0.0;
  }
  CHECK_THROWS_AS(ProjectorBundle(m, 2, rankjump, false), std::invalid_argument);
  // Constant rank but discontinuous fiber: alternating axis projectors.
  // Needs a fine grid so the per-edge smoothness budget C*h is below the
  // order-one jump.
  const ManifoldPtr fine = make_circle(128);
  std::vector<double> rough(fine->node_count() * 4, 0.0);
  for (std::size_t n = 0; n < fine->node_count(); ++n) rough[n * 4 + (n % 2 ? 3 : 0)] = 1.0;
  CHECK_THROWS_AS(ProjectorBundle(fine, 2, rough, false), std::invalid_argument);
}

TEST_CASE("morphism validation and retraction") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);

  const BundleMorphism id = identity_morphism(e);
  const BundleMorphism z = zero_morphism(e, e);
  const BundleMorphism tw = scale_morphism(e, -2.0);
  for (std::size_t node = 0; node < m->node_count(); node += 5) {
    CHECK(max_abs(id.map_mat(node) - e->proj_mat(node)) == 0.0);
    CHECK(max_abs(z.map_mat(node)) == 0.0);
    CHECK(max_abs(tw.map_mat(node) + 2.0 * e->proj_mat(node)) <= 1e-15);
  }

  // pi after iota retracts onto the bundle.
  const BundleMorphism iota = inclusion(e);
  const BundleMorphism pi = projection(e);
  CHECK(iota.target()->rank() == 2);
  const BundleMorphism retract = compose(pi, iota);
  for (std::size_t node = 0; node < m->node_count(); ++node)
    CHECK(max_abs(retract.map_mat(node) - id.map_mat(node)) <= 1e-15);

  // A map that ignores the fiber constraint is rejected.
  std::vector<double> raw(m->node_count() * 4, 0.0);
  for (std::size_t n = 0; n < m->node_count(); ++n) raw[n * 4 + 1] = 1.0;
  CHECK_THROWS_AS(BundleMorphism(e, e, raw), std::invalid_argument);
}

TEST_CASE("biproduct identities") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr a = mobius(m);
  const BundlePtr b = complement(a);
  const BundleMorphism i0 = whitney_inclusion(a, b, 0);
  const BundleMorphism i1 = whitney_inclusion(a, b, 1);
  const BundleMorphism p0 = whitney_projection(a, b, 0);
  const BundleMorphism p1 = whitney_projection(a, b, 1);
  const BundlePtr sum = i0.target();
  CHECK(sum->rank() == 2);

  const BundleMorphism r00 = compose(p0, i0);
  const BundleMorphism r11 = compose(p1, i1);
  const BundleMorphism r10 = compose(p1, i0);
  const BundleMorphism r01 = compose(p0, i1);
  const BundleMorphism ida = identity_morphism(a);
  const BundleMorphism idb = identity_morphism(b);
  for (std::size_t node = 0; node < m->node_count(); ++node) {
    CHECK(max_abs(r00.map_mat(node) - ida.map_mat(node)) <= 1e-15);
    CHECK(max_abs(r11.map_mat(node) - idb.map_mat(node)) <= 1e-15);
    CHECK(max_abs(r10.map_mat(node)) <= 1e-15);
    CHECK(max_abs(r01.map_mat(node)) <= 1e-15);
    const Mat resolved =
        compose(i0, p0).map_mat(node) + compose(i1, p1).map_mat(node);
    CHECK(max_abs(resolved - sum->proj_mat(node)) <= 1e-15);
  }
}

TEST_CASE("composition respects the functor law on projectors") {
  const ManifoldPtr m = make_circle(32);
  const BundlePtr e = mobius(m);
  const BundleMorphism iota = inclusion(e);
  const BundleMorphism pi = projection(e);
  const BundleMorphism idt = identity_morphism(iota.target());
  // iota after pi is the projector field of the ambient trivial bundle
  // restricted to the range of P, i.e. P itself seen in the big bundle.
  const BundleMorphism proj_in_ambient = compose(iota, pi);
  for (std::size_t node = 0; node < m->node_count(); node += 3)
    CHECK(max_abs(proj_in_ambient.map_mat(node) - e->proj_mat(node)) <= 1e-15);
  CHECK(max_abs(idt.map_mat(0) - Mat::identity(2)) == 0.0);
}
