#pragma once

// Dense two-phase tableau simplex, templated on the scalar so the same code
// runs in double (tolerance 1e-9) and exact rational (tolerance 0, Bland's
// rule throughout) arithmetic.
//
// Problem form:  min (or max) c'x  s.t.  A x <= b,  E x = f,  x >= 0
// (free variables supported by internal splitting; solutions are then not
// guaranteed to be vertices).
//
// Returned duals are multipliers of the equivalent minimization: y >= 0 per
// inequality row, with  c + A'y + E'w >= 0  on nonnegative variables and
// objective = -(b'y + f'w).

#include <algorithm>
#include <cmath>
#include <vector>

#include "patrol/common.hpp"
#include "patrol/rational.hpp"

namespace patrol::lp {

enum class Status { Optimal, Infeasible, Unbounded };

template <class T>
struct Eps {
    static T pivot() { return T(1e-9); }
    static T feas() { return T(1e-7); }
    static T certify() { return T(1e-8); }
    static constexpr bool bland_only = false;
};

template <>
struct Eps<Rational> {
    static Rational pivot() { return Rational(0); }
    static Rational feas() { return Rational(0); }
    static Rational certify() { return Rational(0); }
    static constexpr bool bland_only = true;
};

template <class T>
struct Problem {
    int n = 0;
    bool maximize = false;
    std::vector<T> c;
    std::vector<std::vector<T>> A;
    std::vector<T> b;
    std::vector<std::vector<T>> E;
    std::vector<T> f;
    std::vector<uint8_t> free_var;  // empty means all variables >= 0
};

template <class T>
struct Solution {
    Status status = Status::Optimal;
    std::vector<T> x;
    T objective = T(0);
    std::vector<T> dual_ineq, dual_eq;
};

template <class T>
class Simplex {
  public:
    explicit Simplex(const Problem<T>& p) : p_(p) { build(); }

    Solution<T> solve() {
        Solution<T> sol;
        // phase 1: minimize the artificial sum
        std::vector<T> cost(ncols_, T(0));
        for (int j : art_cols_)
            if (j >= 0) cost[j] = T(1);
        reset_costs(cost);
        run();
        if (obj_ > Eps<T>::feas()) {
            sol.status = Status::Infeasible;
            return sol;
        }
        drive_out_artificials();
        for (int j : art_cols_)
            if (j >= 0) allowed_[j] = 0;

        // phase 2
        std::vector<T> cost2(ncols_, T(0));
        for (int j = 0; j < int(var_cols_.size()); ++j) {
            auto [orig, sign] = var_cols_[j];
            T cj = p_.c[orig] * T(sign);
            cost2[j] = p_.maximize ? -cj : cj;
        }
        reset_costs(cost2);
        if (!run()) {
            sol.status = Status::Unbounded;
            return sol;
        }
        certify();

        sol.status = Status::Optimal;
        sol.x.assign(p_.n, T(0));
        for (int i = 0; i < m_; ++i) {
            if (dead_[i]) continue;
            int col = basis_[i];
            if (col < int(var_cols_.size()))
                sol.x[var_cols_[col].first] += T(var_cols_[col].second) * rhs_[i];
        }
        sol.objective = p_.maximize ? -obj_ : obj_;
        int ma = int(p_.A.size()), me = int(p_.E.size());
        sol.dual_ineq.resize(ma);
        sol.dual_eq.resize(me);
        for (int i = 0; i < ma; ++i) sol.dual_ineq[i] = z_[slack_cols_[i]];
        for (int i = 0; i < me; ++i) sol.dual_eq[i] = T(rowsign_[ma + i]) * z_[art_cols_[ma + i]];
        return sol;
    }

  private:
    const Problem<T>& p_;
    int m_ = 0, ncols_ = 0;
    std::vector<std::vector<T>> tab_;
    std::vector<T> rhs_, z_;
    T obj_ = T(0);
    std::vector<int> basis_, slack_cols_, art_cols_;
    std::vector<std::pair<int, int>> var_cols_;  // (original var, sign)
    std::vector<int> rowsign_;
    std::vector<uint8_t> allowed_, dead_;
    std::vector<T> cost_;

    void build() {
        int ma = int(p_.A.size()), me = int(p_.E.size());
        m_ = ma + me;
        if (int(p_.c.size()) != p_.n || int(p_.b.size()) != ma || int(p_.f.size()) != me)
            throw Error("lp: inconsistent problem dimensions");

        for (int j = 0; j < p_.n; ++j) {
            bool fr = !p_.free_var.empty() && p_.free_var[j];
            var_cols_.push_back({j, +1});
            if (fr) var_cols_.push_back({j, -1});
        }
        int nv = int(var_cols_.size());
        slack_cols_.resize(ma);
        for (int i = 0; i < ma; ++i) slack_cols_[i] = nv + i;
        art_cols_.assign(m_, -1);
        int next = nv + ma;
        rowsign_.assign(m_, +1);
        for (int i = 0; i < ma; ++i) {
            if (p_.b[i] < T(0)) rowsign_[i] = -1;
            if (rowsign_[i] < 0) art_cols_[i] = next++;  // negated slack can't start basic
        }
        for (int i = 0; i < me; ++i) {
            if (p_.f[i] < T(0)) rowsign_[ma + i] = -1;
            art_cols_[ma + i] = next++;
        }
        ncols_ = next;

        tab_.assign(m_, std::vector<T>(ncols_, T(0)));
        rhs_.assign(m_, T(0));
        basis_.assign(m_, -1);
        allowed_.assign(ncols_, 1);
        dead_.assign(m_, 0);
        for (int i = 0; i < m_; ++i) {
            bool ineq = i < ma;
            const auto& row = ineq ? p_.A[i] : p_.E[i - ma];
            if (int(row.size()) != p_.n) throw Error("lp: row size mismatch");
            T s = T(rowsign_[i]);
            for (int j = 0; j < nv; ++j) {
                auto [orig, sign] = var_cols_[j];
                tab_[i][j] = s * row[orig] * T(sign);
            }
            if (ineq) tab_[i][slack_cols_[i]] = s;
            if (art_cols_[i] >= 0) tab_[i][art_cols_[i]] = T(1);
            rhs_[i] = s * (ineq ? p_.b[i] : p_.f[i - ma]);
            basis_[i] = art_cols_[i] >= 0 ? art_cols_[i] : slack_cols_[i];
        }
    }

    void reset_costs(const std::vector<T>& cost) {
        cost_ = cost;
        z_ = cost;
        obj_ = T(0);
        for (int i = 0; i < m_; ++i) {
            T cb = cost[basis_[i]];
            if (cb == T(0)) continue;
            for (int j = 0; j < ncols_; ++j) z_[j] -= cb * tab_[i][j];
            obj_ += cb * rhs_[i];
        }
    }

    void pivot(int r, int c) {
        T piv = tab_[r][c];
        for (int j = 0; j < ncols_; ++j) tab_[r][j] /= piv;
        rhs_[r] /= piv;
        tab_[r][c] = T(1);
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            T factor = tab_[i][c];
            if (factor == T(0)) continue;
            for (int j = 0; j < ncols_; ++j) tab_[i][j] -= factor * tab_[r][j];
            tab_[i][c] = T(0);
            rhs_[i] -= factor * rhs_[r];
        }
        T zf = z_[c];
        if (zf != T(0)) {
            for (int j = 0; j < ncols_; ++j) z_[j] -= zf * tab_[r][j];
            z_[c] = T(0);
            obj_ += zf * rhs_[r];  // z-row carries -reduced objective; keep obj in sync
        }
        if (basis_[r] != c) {
            allowed_[basis_[r]] = allowed_[basis_[r]] && basis_[r] < int(var_cols_.size()) +
                int(slack_cols_.size());  // leaving artificials stay barred
            basis_[r] = c;
        }
    }

    // one simplex phase; returns false on unboundedness
    bool run() {
        bool bland = Eps<T>::bland_only;
        int degenerate_streak = 0;
        for (int iter = 0; iter < 50000; ++iter) {
            int enter = -1;
            if (bland) {
                for (int j = 0; j < ncols_ && enter < 0; ++j)
                    if (allowed_[j] && z_[j] < -Eps<T>::pivot()) enter = j;
            } else {
                T best = -Eps<T>::pivot();
                for (int j = 0; j < ncols_; ++j)
                    if (allowed_[j] && z_[j] < best) {
                        best = z_[j];
                        enter = j;
                    }
            }
            if (enter < 0) return true;

            int leave = -1;
            T best_ratio = T(0);
            for (int i = 0; i < m_; ++i) {
                if (dead_[i] || tab_[i][enter] <= Eps<T>::pivot()) continue;
                T num = rhs_[i] < T(0) ? T(0) : rhs_[i];
                T ratio = num / tab_[i][enter];
                if (leave < 0 || ratio < best_ratio ||
                    (ratio == best_ratio && basis_[i] < basis_[leave])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return false;
            if (best_ratio == T(0)) {
                if (++degenerate_streak > 30) bland = true;
            } else {
                degenerate_streak = 0;
                if (!Eps<T>::bland_only) bland = false;
            }
            pivot(leave, enter);
        }
        throw OracleFailure("lp: simplex iteration limit");
    }

    void drive_out_artificials() {
        int nbase = int(var_cols_.size()) + int(slack_cols_.size());
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < nbase) continue;
            int col = -1;
            for (int j = 0; j < nbase && col < 0; ++j) {
                T a = tab_[i][j] < T(0) ? -tab_[i][j] : tab_[i][j];
                if (allowed_[j] && a > Eps<T>::pivot()) col = j;
            }
            if (col >= 0)
                pivot(i, col);
            else
                dead_[i] = 1;  // redundant row
        }
    }

    void certify() const {
        for (int j = 0; j < ncols_; ++j)
            if (allowed_[j] && z_[j] < -Eps<T>::certify())
                throw OracleFailure("lp: dual feasibility certification failed");
    }
};

template <class T>
Solution<T> solve(const Problem<T>& p) {
    return Simplex<T>(p).solve();
}

}  // namespace patrol::lp
