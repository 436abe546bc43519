#include "racma/ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "racma/errors.hpp"

namespace racma
{
    std::string_view status_name(RunStatus status)
    {
        switch (status)
        {
        case RunStatus::budget_exhausted:
            return "budget-exhausted";
        case RunStatus::target_reached:
            return "target-reached";
        case RunStatus::degeneracy:
            return "degeneracy";
        }
        return "?";
    }

    RunStatus parse_status(std::string_view name)
    {
        for (const auto s : {RunStatus::budget_exhausted, RunStatus::target_reached, RunStatus::degeneracy})
            if (status_name(s) == name)
                return s;
        throw InvalidArgument("unknown run status: " + std::string(name));
    }

    std::vector<double> generate_targets(double f0, int n, double final_target)
    {
        if (!(final_target > 0.0) || !(f0 > final_target) || !std::isfinite(f0))
            throw InvalidArgument("generate_targets: need f0 > final target > 0");
        if (n < 2)
            throw InvalidArgument("generate_targets: need at least two targets");
        const double hi = std::log10(f0);
        const double lo = std::log10(final_target);
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i)
            out[i] = std::pow(10.0, hi + (lo - hi) * i / (n - 1));
        out.front() = f0;
        out.back() = final_target;
        return out;
    }

    std::vector<double> generate_checkpoints(double first, double last, int n)
    {
        if (!(first > 0.0) || !(last >= first) || n < 1)
            throw InvalidArgument("generate_checkpoints: need 0 < first <= last and n >= 1");
        if (n == 1)
            return {last};
        std::vector<double> out(n);
        const double ratio = std::log(last / first);
        for (int i = 0; i < n; ++i)
            out[i] = first * std::exp(ratio * i / (n - 1));
        out.front() = first;
        out.back() = last;
        return out;
    }

    EcdfCurve compute_ecdf(std::span<const RunRecord> records, std::span<const double> targets,
                           std::span<const double> checkpoints)
    {
        if (records.empty())
            throw InvalidArgument("compute_ecdf: no records");
        if (targets.empty())
            throw InvalidArgument("compute_ecdf: no targets");

        std::vector<double> sorted_targets(targets.begin(), targets.end());
        std::sort(sorted_targets.begin(), sorted_targets.end());
        std::vector<std::size_t> order(checkpoints.size());
        for (std::size_t c = 0; c < order.size(); ++c)
            order[c] = c;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return checkpoints[a] < checkpoints[b]; });

        std::vector<double> hits(checkpoints.size(), 0.0);
        for (const auto& record : records)
        {
            std::vector<IterationLog> rows = record.rows;
            std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.evals_cum < b.evals_cum; });
            double best = std::numeric_limits<double>::infinity();
            std::size_t r = 0;
            for (const std::size_t c : order)
            {
                for (; r < rows.size() && static_cast<double>(rows[r].evals_cum) <= checkpoints[c]; ++r)
                    best = std::min(best, rows[r].f_clean_at_mean);
                // targets >= best
                const auto solved = sorted_targets.end() - std::lower_bound(sorted_targets.begin(), sorted_targets.end(), best);
                hits[c] += static_cast<double>(solved);
            }
        }

        EcdfCurve curve;
        curve.targets.assign(targets.begin(), targets.end());
        curve.checkpoints.assign(checkpoints.begin(), checkpoints.end());
        const double pairs = static_cast<double>(records.size()) * static_cast<double>(targets.size());
        curve.proportion.resize(hits.size());
        for (std::size_t c = 0; c < hits.size(); ++c)
            curve.proportion[c] = hits[c] / pairs;
        return curve;
    }
}
