#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toeplab/concentration.hpp"
#include "toeplab/format.hpp"
#include "toeplab/harness/config.hpp"
#include "toeplab/harness/experiments.hpp"
#include "toeplab/version.hpp"

namespace toeplab::harness {

inline constexpr char const* record_csv_header
    = "experiment,ensemble,n,sample_index,seed,norm,sup_fejer,sup_laurent,ratio_sqrt_nlogn,elapsed_ms";

inline void write_records_csv(std::ostream& os, std::vector<RunRecord> const& records)
{
    os << record_csv_header << '\n';
    for (auto const& r : records)
    {
        os << r.experiment << ',' << r.ensemble << ',' << r.n << ',' << r.sample_index << ',' << r.seed << ','
           << format_double(r.norm) << ',' << (r.sup_fejer ? format_double(*r.sup_fejer) : "") << ','
           << (r.sup_laurent ? format_double(*r.sup_laurent) : "") << ',' << format_double(r.ratio_sqrt_nlogn)
           << ',' << format_double(r.elapsed_ms) << '\n';
    }
}

inline json report_json(ExperimentResult const& result, ExperimentConfig const& cfg)
{
    json doc;
    doc["tool"] = "toeplab";
    doc["version"] = toeplab::version;
    doc["master_seed"] = cfg.ensemble.master_seed;
    doc["config"] = cfg;
    doc["summary"] = result.summaries;
    doc["report"] = result.report;
    doc["contract_ok"] = result.contract_ok;
    if (!result.contract_message.empty())
        doc["contract_message"] = result.contract_message;
    return doc;
}

namespace detail {

inline void write_file(std::filesystem::path const& path, std::string const& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace detail

/// Sibling path for a named side output, e.g. run.csv -> run.n256_upper_tail.csv.
inline std::filesystem::path side_path(std::filesystem::path const& out, std::string const& name)
{
    std::filesystem::path p = out;
    p.replace_filename(out.stem().string() + "." + name + ".csv");
    return p;
}

/// Write the run to cfg.out_path: one CSV row per RunRecord (format csv) or
/// the JSON report (format json). Tail curves, when present, go to sibling
/// CSV files. Returns the paths written.
inline std::vector<std::filesystem::path> emit_report(ExperimentResult const& result, ExperimentConfig const& cfg)
{
    if (cfg.out_path.empty())
        throw std::invalid_argument("emit_report: out_path is empty");
    std::filesystem::path const out(cfg.out_path);
    std::vector<std::filesystem::path> written;
    std::ostringstream body;
    if (cfg.format == OutputFormat::csv)
        write_records_csv(body, result.records);
    else
        body << report_json(result, cfg).dump(2) << '\n';
    detail::write_file(out, body.str());
    written.push_back(out);
    for (auto const& c : result.curves)
    {
        std::ostringstream curve;
        write_tail_csv(curve, c.curve);
        auto const path = side_path(out, c.name);
        detail::write_file(path, curve.str());
        written.push_back(path);
    }
    return written;
}

}  // namespace toeplab::harness
