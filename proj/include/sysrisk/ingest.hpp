#pragma once

#include <filesystem>

#include "sysrisk/panels.hpp"

namespace sysrisk {

// CSV loaders. All are total on their accepted grammar: every rejection is a
// ParseError carrying file:line or a ValidationError naming bank and date.

// columns: date,bank_id,market_equity,total_assets,book_equity
MarketPanel load_market_panel(const std::filesystem::path& path);

// columns: date + the six state columns (kStateColumns order)
StateSeries load_state_series(const std::filesystem::path& path);

// columns: quarter,bank_id + kQuarterFields (+ optional notional analogues)
QuarterPanel load_quarter_panel(const std::filesystem::path& path);

// columns: date,kind with kind in {event, policy_action, action}
EventTimeline load_events(const std::filesystem::path& path);

// Writers emitting the exact schemas the loaders accept.
void write_market_panel(const MarketPanel&, const std::filesystem::path&);
void write_state_series(const StateSeries&, const std::filesystem::path&);
void write_quarter_panel(const QuarterPanel&, const std::filesystem::path&);
void write_events(const EventTimeline&, const std::filesystem::path&);

} // namespace sysrisk
