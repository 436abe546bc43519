#include "racma/record_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "racma/errors.hpp"

namespace racma
{
    namespace
    {
        using nlohmann::json;

        std::string format_double(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        template <typename T>
        std::string cell(const std::optional<T>& v)
        {
            if (!v)
                return {};
            if constexpr (std::is_floating_point_v<T>)
                return format_double(*v);
            else
                return std::to_string(*v);
        }

        std::vector<std::string> split(const std::string& line)
        {
            std::vector<std::string> out;
            std::string current;
            for (const char c : line)
            {
                if (c == ',')
                {
                    out.push_back(current);
                    current.clear();
                }
                else if (c != '\r')
                    current += c;
            }
            out.push_back(current);
            return out;
        }

        double parse_double(const std::string& s)
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(s, &used);
            }
            catch (const std::exception&)
            {
                used = 0;
            }
            if (used != s.size() || s.empty())
                throw InvalidArgument("CSV: not a number: '" + s + "'");
            return v;
        }

        template <typename T>
        T parse_integer(const std::string& s)
        {
            T v{};
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
                throw InvalidArgument("CSV: not an integer: '" + s + "'");
            return v;
        }

        std::optional<double> optional_double(const std::string& s)
        {
            if (s.empty())
                return std::nullopt;
            return parse_double(s);
        }

        std::string trial_file_name(int trial)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "trial_%02d.csv", trial);
            return buf;
        }

        std::string read_file(const std::filesystem::path& path)
        {
            std::ifstream in(path);
            if (!in)
                throw InvalidArgument("cannot open " + path.string());
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }
    }

    const std::vector<std::string>& row_csv_columns()
    {
        static const std::vector<std::string> columns = {
            "t", "evals_cum", "f_clean_at_mean", "sigma", "lambda", "n_eval", "n_eval_bar",
            "eta_m", "eta_Sigma", "rho_m", "rho_Sigma", "rho_target", "s", "clamped",
        };
        return columns;
    }

    void write_rows_csv(std::ostream& out, const std::vector<IterationLog>& rows)
    {
        const auto& columns = row_csv_columns();
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << columns[i];
        out << '\n';
        for (const auto& r : rows)
        {
            out << r.t << ',' << r.evals_cum << ',' << format_double(r.f_clean_at_mean) << ',' << format_double(r.sigma) << ','
                << r.lambda << ',' << cell(r.n_eval) << ',' << cell(r.n_eval_bar) << ',' << cell(r.eta_m) << ','
                << cell(r.eta_Sigma) << ',' << cell(r.rho_m) << ',' << cell(r.rho_Sigma) << ',' << cell(r.rho_target) << ','
                << cell(r.s) << ',' << (r.clamped ? 1 : 0) << '\n';
        }
    }

    std::vector<IterationLog> read_rows_csv(std::istream& in)
    {
        std::string line;
        if (!std::getline(in, line))
            throw InvalidArgument("CSV: missing header");
        if (split(line) != row_csv_columns())
            throw InvalidArgument("CSV: unexpected header");
        std::vector<IterationLog> rows;
        while (std::getline(in, line))
        {
            if (line.empty() || line == "\r")
                continue;
            const auto c = split(line);
            if (c.size() != row_csv_columns().size())
                throw InvalidArgument("CSV: wrong number of cells");
            IterationLog r;
            r.t = parse_integer<long>(c[0]);
            r.evals_cum = parse_integer<std::uint64_t>(c[1]);
            r.f_clean_at_mean = parse_double(c[2]);
            r.sigma = parse_double(c[3]);
            r.lambda = parse_integer<int>(c[4]);
            r.n_eval = optional_double(c[5]);
            if (!c[6].empty())
                r.n_eval_bar = parse_integer<int>(c[6]);
            r.eta_m = optional_double(c[7]);
            r.eta_Sigma = optional_double(c[8]);
            r.rho_m = optional_double(c[9]);
            r.rho_Sigma = optional_double(c[10]);
            r.rho_target = optional_double(c[11]);
            r.s = optional_double(c[12]);
            r.clamped = parse_integer<int>(c[13]) != 0;
            rows.push_back(std::move(r));
        }
        return rows;
    }

    std::string summary_to_json(const ExperimentSummary& summary)
    {
        json j;
        j["config"] = json::parse(config_to_json(summary.config));
        j["budget"] = summary.budget;
        j["lambda"] = summary.lambda;
        j["f0"] = summary.f0;
        j["trials"] = json::array();
        for (const auto& t : summary.trials)
        {
            j["trials"].push_back({
                {"trial", t.trial},
                {"seed", t.seed},
                {"f0", t.f0},
                {"status", std::string(status_name(t.status))},
                {"message", t.message},
                {"evaluations", t.evaluations},
                {"final_f", t.final_f},
                {"file", t.file},
            });
        }
        return j.dump(2);
    }

    ExperimentSummary summary_from_json(const std::string& text)
    {
        try
        {
            const json j = json::parse(text);
            ExperimentSummary s;
            s.config = config_from_json(j.at("config").dump());
            s.budget = j.at("budget").get<std::uint64_t>();
            s.lambda = j.at("lambda").get<int>();
            s.f0 = j.at("f0").get<double>();
            for (const auto& t : j.at("trials"))
            {
                TrialSummary ts;
                ts.trial = t.at("trial").get<int>();
                ts.seed = t.at("seed").get<std::uint64_t>();
                ts.f0 = t.at("f0").get<double>();
                ts.status = parse_status(t.at("status").get<std::string>());
                ts.message = t.at("message").get<std::string>();
                ts.evaluations = t.at("evaluations").get<std::uint64_t>();
                ts.final_f = t.at("final_f").get<double>();
                ts.file = t.at("file").get<std::string>();
                s.trials.push_back(std::move(ts));
            }
            return s;
        }
        catch (const json::exception& e)
        {
            throw InvalidArgument(std::string("malformed summary: ") + e.what());
        }
    }

    ExperimentSummary write_experiment(const std::filesystem::path& dir, const ExperimentConfig& config,
                                       const std::vector<RunRecord>& records, int lambda)
    {
        std::filesystem::create_directories(dir);
        ExperimentSummary summary;
        summary.config = config;
        summary.budget = config.effective_budget();
        summary.lambda = lambda;
        summary.f0 = records.empty() ? 0.0 : records.front().f0;
        for (const auto& r : records)
        {
            TrialSummary t;
            t.trial = r.trial;
            t.seed = r.seed;
            t.f0 = r.f0;
            t.status = r.status;
            t.message = r.message;
            t.evaluations = r.rows.empty() ? 0 : r.rows.back().evals_cum;
            t.final_f = r.rows.empty() ? r.f0 : r.rows.back().f_clean_at_mean;
            t.file = trial_file_name(r.trial);
            std::ofstream out(dir / t.file);
            write_rows_csv(out, r.rows);
            if (!out)
                throw Error("failed to write " + (dir / t.file).string());
            summary.trials.push_back(std::move(t));
        }
        std::ofstream out(dir / "summary.json");
        out << summary_to_json(summary) << '\n';
        if (!out)
            throw Error("failed to write " + (dir / "summary.json").string());
        return summary;
    }

    std::vector<RunRecord> read_experiment(const std::filesystem::path& dir, ExperimentSummary* summary_out)
    {
        const ExperimentSummary summary = summary_from_json(read_file(dir / "summary.json"));
        std::vector<RunRecord> records;
        for (const auto& t : summary.trials)
        {
            std::ifstream in(dir / t.file);
            if (!in)
                throw InvalidArgument("cannot open " + (dir / t.file).string());
            RunRecord r;
            r.trial = t.trial;
            r.seed = t.seed;
            r.f0 = t.f0;
            r.status = t.status;
            r.message = t.message;
            r.rows = read_rows_csv(in);
            records.push_back(std::move(r));
        }
        if (summary_out)
            *summary_out = summary;
        return records;
    }

    void write_ecdf_csv(std::ostream& out, const EcdfCurve& curve)
    {
        out << "checkpoint,proportion\n";
        for (std::size_t i = 0; i < curve.checkpoints.size(); ++i)
            out << format_double(curve.checkpoints[i]) << ',' << format_double(curve.proportion[i]) << '\n';
    }
}
