#include "dsmt/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "dsmt/errors.hpp"
#include "dsmt/rng.hpp"

namespace dsmt::tasks {

namespace {

// merge sort that counts inversions; scratch has the same size as v
int64_t count_inversions(std::vector<double>& v, std::vector<double>& scratch, size_t lo,
                         size_t hi) {
    if (hi - lo < 2) return 0;
    const size_t mid = lo + (hi - lo) / 2;
    int64_t swaps = count_inversions(v, scratch, lo, mid) + count_inversions(v, scratch, mid, hi);
    size_t a = lo, b = mid, o = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            swaps += static_cast<int64_t>(mid - a);
            scratch[o++] = v[b++];
        } else {
            scratch[o++] = v[a++];
        }
    }
    while (a < mid) scratch[o++] = v[a++];
    while (b < hi) scratch[o++] = v[b++];
    std::copy(scratch.begin() + static_cast<ptrdiff_t>(lo), scratch.begin() + static_cast<ptrdiff_t>(hi),
              v.begin() + static_cast<ptrdiff_t>(lo));
    return swaps;
}

// sum of f(run length) over runs of equal values in sorted order
template <class F>
double tie_sum(const std::vector<double>& sorted, F f) {
    double acc = 0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        acc += f(static_cast<double>(j - i));
        i = j;
    }
    return acc;
}

} // namespace

TauResult kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n != y.size()) throw Error::config("kendall: length mismatch");
    if (n < 2) throw Error::config("kendall: need at least 2 observations");
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            throw Error::numeric("kendall: non-finite input");

    const double dn = static_cast<double>(n);
    const double n0 = dn * (dn - 1.0) / 2.0;

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), size_t{0});
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    // tie counts: pairs tied in x (n1), in y (n2), in both (n3)
    double n1 = 0, n3 = 0;
    double vt = 0, t2 = 0, t3 = 0; // variance helpers over x tie groups
    {
        size_t i = 0;
        while (i < n) {
            size_t j = i + 1;
            while (j < n && x[idx[j]] == x[idx[i]]) ++j;
            const double t = static_cast<double>(j - i);
            n1 += t * (t - 1) / 2;
            vt += t * (t - 1) * (2 * t + 5);
            t2 += t * (t - 1);
            t3 += t * (t - 1) * (t - 2);
            // joint ties within the x group (y is sorted within the group)
            size_t a = i;
            while (a < j) {
                size_t b = a + 1;
                while (b < j && y[idx[b]] == y[idx[a]]) ++b;
                const double u = static_cast<double>(b - a);
                n3 += u * (u - 1) / 2;
                a = b;
            }
            i = j;
        }
    }

    std::vector<double> ysorted(n);
    for (size_t i = 0; i < n; ++i) ysorted[i] = y[idx[i]];
    std::vector<double> scratch(n);
    const int64_t swaps = count_inversions(ysorted, scratch, 0, n); // ysorted now ascending

    double n2 = 0, vu = 0, u2 = 0, u3 = 0;
    {
        size_t i = 0;
        while (i < n) {
            size_t j = i + 1;
            while (j < n && ysorted[j] == ysorted[i]) ++j;
            const double u = static_cast<double>(j - i);
            n2 += u * (u - 1) / 2;
            vu += u * (u - 1) * (2 * u + 5);
            u2 += u * (u - 1);
            u3 += u * (u - 1) * (u - 2);
            i = j;
        }
    }

    TauResult r;
    if (n0 - n1 <= 0 || n0 - n2 <= 0) {
        r.degenerate = true; // one side entirely tied
        return r;
    }
    const double con_minus_dis = n0 - n1 - n2 + n3 - 2.0 * static_cast<double>(swaps);
    r.tau = con_minus_dis / std::sqrt((n0 - n1) * (n0 - n2));
    r.tau = std::clamp(r.tau, -1.0, 1.0);

    double var = (dn * (dn - 1) * (2 * dn + 5) - vt - vu) / 18.0 +
                 t2 * u2 / (2.0 * dn * (dn - 1));
    if (t3 != 0 && u3 != 0) var += t3 * u3 / (9.0 * dn * (dn - 1) * (dn - 2));
    if (var <= 0) {
        r.p = 1.0;
        return r;
    }
    const double z = con_minus_dis / std::sqrt(var);
    r.p = std::erfc(std::abs(z) / std::numbers::sqrt2);
    return r;
}

std::vector<double> by_adjust(const std::vector<double>& p) {
    const size_t m = p.size();
    std::vector<double> adj(m, 1.0);
    if (m == 0) return adj;
    double c = 0;
    for (size_t i = 1; i <= m; ++i) c += 1.0 / static_cast<double>(i);
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return p[a] < p[b]; });
    double running = 1.0;
    for (size_t i = m; i-- > 0;) {
        const double scaled =
            p[order[i]] * static_cast<double>(m) * c / static_cast<double>(i + 1);
        running = std::min(running, std::min(1.0, scaled));
        adj[order[i]] = running;
    }
    return adj;
}

int64_t RankedFeatureList::relevant_count() const {
    int64_t k = 0;
    for (const RankedFeature& e : entries) k += e.relevant;
    return k;
}

RankedFeatureList rank_features(const FeatureTable& table,
                                const std::map<std::string, int>& labels, double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw Error::config("ranking: alpha must be in (0,1)");
    std::vector<size_t> rows;
    std::vector<double> row_label;
    for (size_t r = 0; r < table.rows(); ++r) {
        const auto it = labels.find(table.row_ids[r]);
        if (it == labels.end()) continue;
        if (it->second != 0 && it->second != 1)
            throw Error::data("ranking: labels must be 0 or 1");
        rows.push_back(r);
        row_label.push_back(static_cast<double>(it->second));
    }
    if (rows.size() < 5)
        throw Error::config("ranking: need at least 5 labelled rows, got " +
                            std::to_string(rows.size()));

    RankedFeatureList out;
    out.alpha = alpha;
    out.labelled_rows = static_cast<int64_t>(rows.size());

    std::vector<double> xs, ys;
    for (size_t c = 0; c < table.cols(); ++c) {
        xs.clear();
        ys.clear();
        for (size_t i = 0; i < rows.size(); ++i) {
            if (table.is_masked(rows[i], c)) continue;
            xs.push_back(table.at(rows[i], c));
            ys.push_back(row_label[i]);
        }
        // a column masked on half or more of the labelled rows is not a
        // usable task candidate
        if (xs.size() * 2 <= rows.size()) {
            ++out.excluded_columns;
            continue;
        }
        RankedFeature f;
        f.desc = table.columns[c];
        f.column = c;
        const TauResult t = kendall_tau(xs, ys);
        f.tau = t.tau;
        f.p = t.p;
        f.degenerate = t.degenerate;
        out.entries.push_back(f);
    }

    std::vector<double> pvals(out.entries.size());
    for (size_t i = 0; i < out.entries.size(); ++i) pvals[i] = out.entries[i].p;
    const std::vector<double> adj = by_adjust(pvals);
    for (size_t i = 0; i < out.entries.size(); ++i) {
        out.entries[i].p_adj = adj[i];
        out.entries[i].relevant = !out.entries[i].degenerate && adj[i] < alpha;
    }

    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const RankedFeature& a, const RankedFeature& b) {
                         const double ta = std::abs(a.tau), tb = std::abs(b.tau);
                         if (ta != tb) return ta > tb;
                         return a.column < b.column; // catalog order on ties
                     });
    return out;
}

AuxiliaryTaskSet select_tasks(const FeatureTable& table, const RankedFeatureList& ranked,
                              const std::vector<std::string>& train_ids, int64_t k,
                              SelectStrategy strategy, uint64_t seed) {
    if (k < 1) throw Error::config("task selection: k must be >= 1");
    std::vector<const RankedFeature*> relevant;
    for (const RankedFeature& e : ranked.entries)
        if (e.relevant) relevant.push_back(&e);
    if (k > static_cast<int64_t>(relevant.size()))
        throw Error::config("task selection: k=" + std::to_string(k) + " exceeds the " +
                            std::to_string(relevant.size()) + " relevant features available");

    std::vector<const RankedFeature*> chosen;
    if (strategy == SelectStrategy::Importance) {
        chosen.assign(relevant.begin(), relevant.begin() + static_cast<ptrdiff_t>(k));
    } else {
        SplitRng rng = SplitRng(seed).split("task-selection");
        std::vector<size_t> pool(relevant.size());
        std::iota(pool.begin(), pool.end(), size_t{0});
        for (int64_t i = 0; i < k; ++i) {
            const size_t j =
                static_cast<size_t>(i) +
                static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(pool.size()) - i));
            std::swap(pool[static_cast<size_t>(i)], pool[j]);
            chosen.push_back(relevant[pool[static_cast<size_t>(i)]]);
        }
    }

    // map train ids to table rows once
    std::map<std::string, size_t> row_index;
    for (size_t r = 0; r < table.rows(); ++r) row_index[table.row_ids[r]] = r;
    std::vector<size_t> rows;
    rows.reserve(train_ids.size());
    for (const std::string& id : train_ids) {
        const auto it = row_index.find(id);
        if (it == row_index.end())
            throw Error::config("task selection: id '" + id + "' not in feature table");
        rows.push_back(it->second);
    }

    AuxiliaryTaskSet set;
    set.row_ids = train_ids;
    set.targets.assign(rows.size() * static_cast<size_t>(k), 0.0f);
    set.masked.assign(rows.size() * static_cast<size_t>(k), 0);
    for (int64_t j = 0; j < k; ++j) {
        const RankedFeature& f = *chosen[static_cast<size_t>(j)];
        double mean = 0, m2 = 0;
        int64_t cnt = 0;
        for (size_t r : rows) {
            if (table.is_masked(r, f.column)) continue;
            mean += table.at(r, f.column);
            ++cnt;
        }
        if (cnt > 0) mean /= static_cast<double>(cnt);
        for (size_t r : rows) {
            if (table.is_masked(r, f.column)) continue;
            const double d = table.at(r, f.column) - mean;
            m2 += d * d;
        }
        const double stdev = cnt > 0 ? std::sqrt(m2 / static_cast<double>(cnt)) : 0.0;

        AuxiliaryTask task;
        task.desc = f.desc;
        task.column = f.column;
        task.mean = mean;
        task.stdev = stdev > 0 ? stdev : 1.0;
        set.tasks.push_back(task);

        for (size_t i = 0; i < rows.size(); ++i) {
            const size_t cell = i * static_cast<size_t>(k) + static_cast<size_t>(j);
            if (table.is_masked(rows[i], f.column)) {
                set.masked[cell] = 1;
                continue;
            }
            set.targets[cell] =
                static_cast<float>((table.at(rows[i], f.column) - task.mean) / task.stdev);
        }
    }
    return set;
}

void write_ranking_csv(const RankedFeatureList& ranked, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error::data("ranking csv: cannot open '" + path + "' for writing");
    out << "rank,stream,feature,params,tau,p,p_adj,relevant\n";
    char buf[160];
    for (size_t i = 0; i < ranked.entries.size(); ++i) {
        const RankedFeature& e = ranked.entries[i];
        std::snprintf(buf, sizeof buf, "%zu,%s,%s,%s,%.17g,%.17g,%.17g,%d\n", i + 1,
                      e.desc.stream.c_str(), e.desc.feature.c_str(),
                      e.desc.param >= 0 ? std::to_string(e.desc.param).c_str() : "", e.tau, e.p,
                      e.p_adj, e.relevant ? 1 : 0);
        out << buf;
    }
    if (!out) throw Error::data("ranking csv: write failed for '" + path + "'");
}

} // namespace dsmt::tasks
