#pragma once

#include <ostream>

#include "levelk/csv.hpp"
#include "levelk/episode.hpp"

namespace levelk {

inline constexpr const char* kTraceCsvHeader =
    "time,vehicle_id,lane_id,p_lon,p_lat,v_lon,v_lat,heading,action_index,reward";

// One row per vehicle per sim step; action and reward columns are filled on
// ego rows only (reward on the last row of each decision window).
inline TraceFn make_csv_trace(std::ostream& out) {
    out << kTraceCsvHeader << '\n';
    return [&out](const TraceRow& r) {
        out << format_double(r.time) << ',' << r.vehicle_id << ',' << r.lane_id << ','
            << format_double(r.p_lon) << ',' << format_double(r.p_lat) << ','
            << format_double(r.v_lon) << ',' << format_double(r.v_lat) << ','
            << format_double(r.heading) << ',';
        if (r.has_action) out << r.action_index;
        out << ',';
        if (r.has_reward) out << format_double(r.reward);
        out << '\n';
    };
}

inline void write_trace_footer(std::ostream& out, Outcome outcome, double elapsed,
                               double total_reward) {
    out << "# outcome=" << outcome_name(outcome) << " elapsed=" << format_double(elapsed)
        << " reward=" << format_double(total_reward) << '\n';
}

}  // namespace levelk
