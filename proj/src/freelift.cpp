#include "ccw/freelift.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "ccw/errors.hpp"

namespace ccw {

namespace {

// B_m^+ / m! with the B_1 = +1/2 convention, enough for depth <= 10.
const std::vector<Rational>& dexpinv_coeffs() {
    static const std::vector<Rational> c = {
        Rational(1),          Rational(1, 2),      Rational(1, 12),
        Rational(0),          Rational(-1, 720),   Rational(0),
        Rational(1, 30240),   Rational(0),         Rational(-1, 1209600),
        Rational(0),          Rational(1, 47900160)};
    return c;
}

void sparse_add(SparseRat& acc, int k, const Rational& v) {
    if (v == 0) return;
    auto it = acc.find(k);
    if (it == acc.end()) {
        acc.emplace(k, v);
    } else {
        it->second += v;
        if (it->second == 0) acc.erase(it);
    }
}

}  // namespace

HallBasis HallBasis::build(int q, std::vector<int> gen_weights, int M) {
    if (q < 1) throw UsageError("hall basis needs q >= 1 generators");
    if (static_cast<int>(gen_weights.size()) != q)
        throw UsageError("generator weight count mismatch");
    for (int w : gen_weights)
        if (w < 1) throw UsageError("generator weights must be >= 1");
    if (M < *std::max_element(gen_weights.begin(), gen_weights.end()))
        throw UsageError("depth must be at least the largest generator weight");

    HallBasis hb;
    hb.q_ = q;
    hb.gen_weights_ = gen_weights;
    hb.M_ = M;

    // internal generation order: generators first, then by length
    struct Node {
        int left = -1, right = -1, gen = -1, hdeg = 0, len = 0;
        std::string repr;
    };
    std::vector<Node> nodes;
    for (int i = 0; i < q; ++i) {
        Node n;
        n.gen = i;
        n.hdeg = gen_weights[i];
        n.len = 1;
        n.repr = "x" + std::to_string(i + 1);
        if (n.hdeg <= M) nodes.push_back(n);
    }
    if (nodes.empty()) throw UsageError("no generator fits under the depth bound");
    const int max_len = M;  // every letter weighs at least 1
    for (int L = 2; L <= max_len; ++L) {
        size_t before = nodes.size();
        for (size_t a = 0; a < before; ++a)
            for (size_t b = 0; b < before; ++b) {
                if (nodes[a].len + nodes[b].len != L) continue;
                if (a <= b) continue;  // requires a > b in internal order
                if (nodes[a].len > 1 &&
                    static_cast<size_t>(nodes[a].right) > b)
                    continue;  // Hall condition: a = [c,d] needs d <= b
                int hd = nodes[a].hdeg + nodes[b].hdeg;
                if (hd > M) continue;
                Node n;
                n.left = static_cast<int>(a);
                n.right = static_cast<int>(b);
                n.gen = -1;
                n.hdeg = hd;
                n.len = L;
                n.repr = "[" + nodes[a].repr + "," + nodes[b].repr + "]";
                nodes.push_back(n);
            }
    }

    // presentation order: (hdeg, len, repr)
    std::vector<int> order(nodes.size());
    for (size_t i = 0; i < nodes.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (nodes[a].hdeg != nodes[b].hdeg) return nodes[a].hdeg < nodes[b].hdeg;
        if (nodes[a].len != nodes[b].len) return nodes[a].len < nodes[b].len;
        return nodes[a].repr < nodes[b].repr;
    });
    std::vector<int> pos(nodes.size());
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

    hb.elems_.resize(nodes.size());
    hb.gen_pos_.assign(q, -1);
    for (size_t i = 0; i < order.size(); ++i) {
        const Node& n = nodes[order[i]];
        HallElement e;
        e.gen = n.gen;
        e.hdeg = n.hdeg;
        e.len = n.len;
        e.repr = n.repr;
        e.internal_rank = order[i];
        if (n.len > 1) {
            e.left = pos[n.left];
            e.right = pos[n.right];
            hb.pair_index_[{e.left, e.right}] = static_cast<int>(i);
        } else {
            hb.gen_pos_[n.gen] = static_cast<int>(i);
        }
        hb.elems_[i] = std::move(e);
    }
    return hb;
}

const SparseRat& HallBasis::reduce_pair(int a, int b) const {
    auto key = std::make_pair(a, b);
    auto hit = reduce_cache_.find(key);
    if (hit != reduce_cache_.end()) return hit->second;

    SparseRat out;
    const auto& ea = elems_[a];
    const auto& eb = elems_[b];
    if (a == b || ea.hdeg + eb.hdeg > M_) {
        // zero in the depth-M quotient
    } else if (ea.internal_rank < eb.internal_rank) {
        for (const auto& [k, v] : reduce_pair(b, a)) sparse_add(out, k, -v);
    } else if (ea.len == 1 || elems_[ea.right].internal_rank <= eb.internal_rank) {
        // [a, b] is itself a basic pair
        auto it = pair_index_.find({a, b});
        if (it == pair_index_.end())
            throw StructuralDefect("hall table is missing a basic pair: [" + ea.repr + "," +
                                   eb.repr + "]");
        sparse_add(out, it->second, Rational(1));
    } else {
        // a = [c,d] with d > b: [[c,d],b] = [c,[d,b]] - [d,[c,b]]
        int c = ea.left, d = ea.right;
        for (const auto& [e, v] : reduce_pair(d, b))
            for (const auto& [k, w] : reduce_pair(c, e)) sparse_add(out, k, v * w);
        for (const auto& [e, v] : reduce_pair(c, b))
            for (const auto& [k, w] : reduce_pair(d, e)) sparse_add(out, k, -(v * w));
    }
    return reduce_cache_.emplace(key, std::move(out)).first->second;
}

SparseRat HallBasis::word_coords(const Word& w) const {
    if (w.empty()) throw UsageError("empty word");
    if (w.size() == 1) {
        SparseRat r;
        r[gen_pos_[w[0]]] = 1;
        return r;
    }
    Word tail(w.begin() + 1, w.end());
    SparseRat t = word_coords(tail);
    SparseRat out;
    int g = gen_pos_[w[0]];
    for (const auto& [e, v] : t)
        for (const auto& [k, c] : reduce_pair(g, e)) sparse_add(out, k, v * c);
    return out;
}

StructureConstants HallBasis::structure_constants() const {
    StructureConstants sc;
    sc.n = dim();
    for (const auto& e : elems_) sc.degrees.push_back(e.hdeg);
    for (int i = 0; i < sc.n; ++i)
        for (int j = 0; j < sc.n; ++j) {
            if (i == j) continue;
            for (const auto& [k, v] : reduce_pair(i, j)) sc.set(i, j, k, v);
        }
    if (auto bad = sc.jacobi_violation())
        throw StructuralDefect("free structure constants violate the Jacobi identity");
    return sc;
}

FreeRealization free_realization(const HallBasis& basis) {
    FreeRealization fr;
    fr.basis = basis;
    fr.constants = basis.structure_constants();
    const int n = basis.dim();
    fr.chart = Chart::numbered(n, "g");
    const auto& beta = dexpinv_coeffs();

    // v = the identity coordinate vector as polynomials
    std::vector<RPoly> v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(RPoly::variable(n, i));

    for (int j = 0; j < n; ++j) {
        std::vector<RPoly> term(n, RPoly(n));
        term[j] = RPoly::constant(n, Rational(1));
        std::vector<RPoly> acc(n, RPoly(n));
        for (int m = 0; m < static_cast<int>(beta.size()); ++m) {
            if (m > 0) term = fr.constants.bracket(v, term);
            bool zero = true;
            for (const auto& t : term)
                if (!t.is_zero()) zero = false;
            if (beta[m] != 0)
                for (int k = 0; k < n; ++k) acc[k] += term[k].scaled(beta[m]);
            if (zero) break;
        }
        fr.fields.emplace_back(fr.chart, std::move(acc));
    }

    // verification: anchored at e_j, homogeneous, and the bracket table
    // reproduces the free structure constants exactly
    RatVec zero(n, Rational(0));
    std::vector<int> weights;
    for (const auto& e : basis.elements()) weights.push_back(e.hdeg);
    for (int j = 0; j < n; ++j) {
        auto val = fr.fields[j].evaluate<Rational>(zero);
        for (int k = 0; k < n; ++k)
            if (val[k] != (k == j ? 1 : 0))
                throw StructuralDefect("free realization is not anchored at the basis");
        if (!is_homogeneous_of_order(fr.fields[j], weights, -basis.elements()[j].hdeg))
            throw StructuralDefect("free realization field is not homogeneous");
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            RField br = lie_bracket(fr.fields[i], fr.fields[j]);
            RField expect = VecField<Rational>::zero(fr.chart);
            for (const auto& [key, val] : fr.constants.c) {
                auto [ci, cj, ck] = key;
                if (ci == i && cj == j) expect = expect + fr.fields[ck].scaled(val);
            }
            if (!(br == expect))
                throw StructuralDefect("free realization bracket table mismatch at (" +
                                       std::to_string(i) + "," + std::to_string(j) + ")");
        }
    return fr;
}

std::vector<RPoly> invert_unipotent(const std::vector<RPoly>& f,
                                    const std::vector<int>& weights) {
    const int n = static_cast<int>(f.size());
    std::vector<RPoly> g;
    g.reserve(n);
    for (int i = 0; i < n; ++i) g.push_back(RPoly::variable(n, i));
    long wmax = 0;
    for (int w : weights) wmax += w;
    for (int iter = 0; iter <= wmax + 2; ++iter) {
        // g <- id - (f o g - g)
        std::vector<RPoly> fog(n);
        bool fixed = true;
        for (int i = 0; i < n; ++i) {
            fog[i] = f[i].compose(g);
            RPoly delta = fog[i] - g[i];
            RPoly xi = RPoly::variable(n, i);
            if (!(fog[i] == xi)) fixed = false;
        }
        if (fixed) return g;
        std::vector<RPoly> next(n);
        for (int i = 0; i < n; ++i) next[i] = RPoly::variable(n, i) - (fog[i] - g[i]);
        g = std::move(next);
    }
    throw StructuralDefect("unipotent inversion did not terminate");
}

LiftedSystem lift_system(const WeightedSystem& sys, const RatVec& u,
                         const FlowConfig& cfg) {
    LiftedSystem ls;
    ls.base = sys;
    ls.na = nilpotentize(sys, u, cfg);
    ls.hall = HallBasis::build(sys.q(), sys.weights, sys.depth);
    ls.free_constants = ls.hall.structure_constants();

    const int n = sys.dim();
    const int nt = ls.hall.dim();
    const int M = sys.depth;
    const auto& xw = ls.na.coord_weights();

    // images of the Hall elements under Psi (bracket trees over hat generators)
    std::vector<RField> psi(nt, VecField<Rational>::zero(sys.chart));
    {
        std::vector<int> hat_gen_pos(sys.q(), -1);
        for (size_t i = 0; i < ls.na.words().size(); ++i)
            if (ls.na.words()[i].word.size() == 1)
                hat_gen_pos[ls.na.words()[i].word[0]] = static_cast<int>(i);
        std::function<RField(int)> image = [&](int idx) -> RField {
            const auto& e = ls.hall.elements()[idx];
            if (e.len == 1) return ls.na.hat[hat_gen_pos[e.gen]];
            return lie_bracket(image(e.left), image(e.right));
        };
        for (int i = 0; i < nt; ++i) psi[i] = image(i);
    }
    RatVec zero(n, Rational(0));
    RatMat psi_at0;
    for (int i = 0; i < nt; ++i) psi_at0.push_back(psi[i].evaluate<Rational>(zero));

    // frame words in Hall coordinates
    for (const auto& fw : ls.na.chart.frame().words)
        ls.frame_free.push_back(ls.hall.word_coords(fw.word));

    // isotropy algebra: degreewise kernels of the evaluation at the anchor
    for (int deg = 1; deg <= M; ++deg) {
        std::vector<int> idxs;
        for (int i = 0; i < nt; ++i)
            if (ls.hall.elements()[i].hdeg == deg) idxs.push_back(i);
        if (idxs.empty()) continue;
        RatMat a(n, RatVec(idxs.size(), Rational(0)));
        for (size_t c = 0; c < idxs.size(); ++c)
            for (int r = 0; r < n; ++r) a[r][c] = psi_at0[idxs[c]][r];
        for (const auto& ker : rat_kernel(a)) {
            SparseRat z;
            for (size_t c = 0; c < idxs.size(); ++c)
                if (ker[c] != 0) z[idxs[c]] = ker[c];
            ls.z_basis.push_back(std::move(z));
            ls.z_degrees.push_back(deg);
        }
    }
    if (static_cast<int>(ls.z_basis.size()) != nt - n)
        throw StructuralDefect("isotropy algebra dimension mismatch: expected " +
                               std::to_string(nt - n) + ", found " +
                               std::to_string(ls.z_basis.size()));

    // change of basis (columns: frame images, then isotropy basis)
    RatMat basis_cols(nt, RatVec(nt, Rational(0)));
    auto put_col = [&](int col, const SparseRat& v) {
        for (const auto& [k, val] : v) basis_cols[k][col] = val;
    };
    for (int j = 0; j < n; ++j) put_col(j, ls.frame_free[j]);
    for (int j = 0; j < nt - n; ++j) put_col(n + j, ls.z_basis[j]);
    if (rat_rank(basis_cols) != nt)
        throw StructuralDefect("frame images and isotropy basis do not span the free algebra");

    // mixed second-kind coordinates on the free group:
    //   g(y,z) = exp(sum_k z_k Zhat_k) exp(y_N Y_N) ... exp(y_1 Y_1)
    // computed in exponential coordinates via the exact truncated series.
    std::vector<RPoly> w(nt, RPoly(nt));
    {
        std::vector<RPoly> acc(nt, RPoly(nt));
        for (int j = 0; j < nt - n; ++j) {
            RPoly zj = RPoly::variable(nt, n + j);
            for (const auto& [k, val] : ls.z_basis[j]) acc[k] += zj.scaled(val);
        }
        for (int j = n - 1; j >= 0; --j) {
            std::vector<RPoly> yterm(nt, RPoly(nt));
            RPoly yj = RPoly::variable(nt, j);
            for (const auto& [k, val] : ls.frame_free[j]) yterm[k] += yj.scaled(val);
            acc = bch_compose(ls.free_constants, acc, yterm, M);
        }
        w = std::move(acc);
    }

    // Jacobian and its exact inverse (unipotent by the weight grading)
    std::vector<std::vector<RPoly>> J(nt, std::vector<RPoly>(nt, RPoly(nt)));
    for (int a = 0; a < nt; ++a)
        for (int c = 0; c < nt; ++c) J[a][c] = w[a].derivative(c);
    RatVec zero_nt(nt, Rational(0));
    RatMat P(nt, RatVec(nt, Rational(0)));
    for (int a = 0; a < nt; ++a)
        for (int c = 0; c < nt; ++c) P[a][c] = J[a][c].evaluate<Rational>(zero_nt);
    if (P != basis_cols)
        throw StructuralDefect("group coordinate Jacobian at 0 does not match the basis");
    // Pinv exact
    RatMat Pinv;
    {
        // reuse Gauss-Jordan via rat_solve on unit columns
        Pinv.assign(nt, RatVec(nt, Rational(0)));
        for (int c = 0; c < nt; ++c) {
            RatVec e(nt, Rational(0));
            e[c] = 1;
            auto col = rat_solve(P, e);
            if (!col) throw StructuralDefect("basis matrix not invertible");
            for (int r = 0; r < nt; ++r) Pinv[r][c] = (*col)[r];
        }
    }
    auto mat_mul_poly = [&](const std::vector<std::vector<RPoly>>& A,
                            const std::vector<std::vector<RPoly>>& B) {
        std::vector<std::vector<RPoly>> C(nt, std::vector<RPoly>(nt, RPoly(nt)));
        for (int i = 0; i < nt; ++i)
            for (int j = 0; j < nt; ++j) {
                RPoly s(nt);
                for (int k = 0; k < nt; ++k)
                    if (!A[i][k].is_zero() && !B[k][j].is_zero()) s += A[i][k] * B[k][j];
                C[i][j] = std::move(s);
            }
        return C;
    };
    std::vector<std::vector<RPoly>> Nmat(nt, std::vector<RPoly>(nt, RPoly(nt)));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nt; ++j) {
            RPoly s(nt);
            for (int k = 0; k < nt; ++k) {
                RPoly e = J[k][j];
                e.add_term(Mono(nt, 0), -P[k][j]);
                if (!e.is_zero()) s += e.scaled(Pinv[i][k]);
            }
            Nmat[i][j] = std::move(s);
        }
    std::vector<std::vector<RPoly>> inv_series(nt, std::vector<RPoly>(nt, RPoly(nt)));
    for (int i = 0; i < nt; ++i) inv_series[i][i] = RPoly::constant(nt, Rational(1));
    {
        std::vector<std::vector<RPoly>> power = Nmat;
        int sign = -1;
        for (int k = 1; k <= nt + 1; ++k) {
            bool zero_mat = true;
            for (int i = 0; i < nt && zero_mat; ++i)
                for (int j = 0; j < nt && zero_mat; ++j)
                    if (!power[i][j].is_zero()) zero_mat = false;
            if (zero_mat) break;
            for (int i = 0; i < nt; ++i)
                for (int j = 0; j < nt; ++j)
                    inv_series[i][j] += power[i][j].scaled(Rational(sign));
            if (k == nt + 1)
                throw StructuralDefect("coordinate Jacobian is not unipotent");
            power = mat_mul_poly(power, Nmat);
            sign = -sign;
        }
    }
    // Jinv = inv_series * Pinv
    std::vector<std::vector<RPoly>> Jinv(nt, std::vector<RPoly>(nt, RPoly(nt)));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nt; ++j) {
            RPoly s(nt);
            for (int k = 0; k < nt; ++k)
                if (!inv_series[i][k].is_zero()) s += inv_series[i][k].scaled(Pinv[k][j]);
            Jinv[i][j] = std::move(s);
        }

    // left-invariant generator fields in first-kind coordinates, pulled into
    // the (y, z) coordinates
    const auto& beta = dexpinv_coeffs();
    std::vector<std::vector<RPoly>> tails(sys.q());
    std::vector<std::vector<RPoly>> yblocks(sys.q());
    for (int k = 0; k < sys.q(); ++k) {
        std::vector<RPoly> term(nt, RPoly(nt));
        term[ls.hall.generator_index(k)] = RPoly::constant(nt, Rational(1));
        std::vector<RPoly> lk(nt, RPoly(nt));
        for (int m = 0; m < static_cast<int>(beta.size()); ++m) {
            if (m > 0) term = ls.free_constants.bracket(w, term);
            bool zero_term = true;
            for (const auto& t : term)
                if (!t.is_zero()) zero_term = false;
            if (beta[m] != 0)
                for (int a = 0; a < nt; ++a) lk[a] += term[a].scaled(beta[m]);
            if (zero_term) break;
        }
        std::vector<RPoly> lt(nt, RPoly(nt));
        for (int a = 0; a < nt; ++a) {
            RPoly s(nt);
            for (int b = 0; b < nt; ++b)
                if (!Jinv[a][b].is_zero() && !lk[b].is_zero()) s += Jinv[a][b] * lk[b];
            lt[a] = std::move(s);
        }
        // y block must not involve z
        for (int a = 0; a < n; ++a)
            for (const auto& [m, c] : lt[a].terms())
                for (int zv = n; zv < nt; ++zv)
                    if (m[zv] != 0)
                        throw StructuralDefect("lifted field y-block depends on z coordinates");
        yblocks[k].assign(lt.begin(), lt.begin() + n);
        tails[k].assign(lt.begin() + n, lt.end());
    }

    // hat-frame chart psi on the x side and the conjugation of the tails
    std::vector<RPoly> psi_map;
    {
        std::vector<RPoly> current;
        for (int j = 0; j < n; ++j) current.push_back(RPoly::constant(n, Rational(0)));
        for (int k = n - 1; k >= 0; --k) {
            auto m = symbolic_time_flow(ls.na.hat_frame[k], cfg.series_cap);
            if (!m) throw StructuralDefect("hat frame flow series did not terminate");
            std::vector<RPoly> subs = current;
            subs.push_back(RPoly::variable(n, k));
            std::vector<RPoly> next(n);
            for (int j = 0; j < n; ++j) next[j] = (*m)[j].compose(subs);
            current = std::move(next);
        }
        psi_map = current;
        for (int j = 0; j < n; ++j)
            for (const auto& [mo, c] : psi_map[j].terms())
                if (weighted_degree(mo, xw) != xw[j])
                    throw StructuralDefect("hat chart is not weighted homogeneous");
    }
    auto psi_inv = invert_unipotent(psi_map, xw);

    // verify the y blocks against the hat generators:
    //   Dpsi(y) * yblock_k(y) == hatX_k(psi(y))   (pure polynomial identity)
    {
        std::vector<std::vector<RPoly>> Dpsi(n, std::vector<RPoly>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Dpsi[i][j] = psi_map[i].derivative(j);
        std::vector<int> hat_gen_pos(sys.q(), -1);
        for (size_t i = 0; i < ls.na.words().size(); ++i)
            if (ls.na.words()[i].word.size() == 1)
                hat_gen_pos[ls.na.words()[i].word[0]] = static_cast<int>(i);
        auto restrict_to_x = [&](const RPoly& p) {
            RPoly r(n);
            for (const auto& [m, c] : p.terms()) {
                Mono mm(m.begin(), m.begin() + n);
                r.add_term(mm, c);
            }
            return r;
        };
        for (int k = 0; k < sys.q(); ++k) {
            for (int i = 0; i < n; ++i) {
                RPoly lhs(n);
                for (int j = 0; j < n; ++j) {
                    RPoly yb = restrict_to_x(yblocks[k][j]);
                    if (!Dpsi[i][j].is_zero() && !yb.is_zero()) lhs += Dpsi[i][j] * yb;
                }
                RPoly rhs = ls.na.hat[hat_gen_pos[k]].component(i).compose(psi_map);
                if (!(lhs == rhs))
                    throw StructuralDefect("lifted y-block does not match the hat generator");
            }
        }
    }

    // assemble the lifted chart and fields over (x, z)
    std::vector<std::string> lifted_names = sys.chart.names;
    for (int j = n; j < nt; ++j) lifted_names.push_back("z" + std::to_string(j + 1));
    Chart lchart(lifted_names);
    std::vector<int> xz_map_x(n), xz_map_full(nt);
    for (int i = 0; i < n; ++i) xz_map_x[i] = i;
    for (int i = 0; i < nt; ++i) xz_map_full[i] = i;

    // substitution (y,z) -> (psi_inv(x), z) for the tails
    std::vector<RPoly> subs_yz;
    for (int i = 0; i < n; ++i) subs_yz.push_back(psi_inv[i].embed(nt, xz_map_x));
    for (int i = n; i < nt; ++i) subs_yz.push_back(RPoly::variable(nt, i));

    ls.coord_weights = xw;
    for (int d : ls.z_degrees) ls.coord_weights.push_back(d);

    std::vector<RField> lifted_gens;
    for (int k = 0; k < sys.q(); ++k) {
        std::vector<RPoly> comps(nt, RPoly(nt));
        // base block: pushforward generator X'_k on the x chart
        int gen_word_pos = -1;
        for (size_t i = 0; i < ls.na.words().size(); ++i)
            if (ls.na.words()[i].word == Word{k}) gen_word_pos = static_cast<int>(i);
        for (int j = 0; j < n; ++j)
            comps[j] = ls.na.pushforward.pushed[gen_word_pos].component(j).embed(nt, xz_map_x);
        std::vector<RPoly> hat_comps(nt, RPoly(nt));
        for (int j = 0; j < n; ++j)
            hat_comps[j] = ls.na.hat[gen_word_pos].component(j).embed(nt, xz_map_x);
        for (int j = 0; j < nt - n; ++j) {
            RPoly tail = tails[k][j].compose(subs_yz);
            comps[n + j] = tail;
            hat_comps[n + j] = tail;
            if (!tail.is_zero())
                for (const auto& [mo, c] : tail.terms())
                    if (weighted_degree(mo, ls.coord_weights) !=
                        ls.coord_weights[n + j] - sys.weights[k])
                        throw StructuralDefect("lifted tail is not homogeneous of order -d_k");
        }
        lifted_gens.emplace_back(lchart, std::move(comps));
        ls.lifted_hat.emplace_back(lchart, std::move(hat_comps));
    }

    ls.lifted.name = sys.name.empty() ? "lifted" : sys.name + "-lifted";
    ls.lifted.chart = lchart;
    ls.lifted.generators = lifted_gens;
    ls.lifted.weights = sys.weights;
    ls.lifted.depth = M;
    ls.lifted.anchor.assign(nt, Rational(0));

    // free up to order M at the lifted anchor
    auto snap = filtration_dims(ls.lifted, ls.lifted.anchor);
    if (snap.dims.back() != nt)
        throw StructuralDefect("lifted system is not free up to the depth at the anchor (dim " +
                               std::to_string(snap.dims.back()) + " != " + std::to_string(nt) + ")");
    return ls;
}

std::vector<double> project(const LiftedSystem& ls, const std::vector<double>& p_ext) {
    return std::vector<double>(p_ext.begin(), p_ext.begin() + ls.base.dim());
}

RatVec project(const LiftedSystem& ls, const RatVec& p_ext) {
    return RatVec(p_ext.begin(), p_ext.begin() + ls.base.dim());
}

}  // namespace ccw
