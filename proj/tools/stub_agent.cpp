// Serves a fixture of Interface-group counters over SNMP v2c until the rows run
// out or the process is interrupted.
#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "mibids/snmp/stub_agent.hpp"

namespace {
std::atomic<bool> g_stop{false};
}

int main(int argc, char** argv) {
    CLI::App app{"Stub SNMP agent serving counters from a fixture CSV"};
    std::string fixture;
    mibids::snmp::StubAgent::Options opts;
    app.add_option("--fixture", fixture, "Fixture CSV")->required()->check(CLI::ExistingFile);
    app.add_option("--port", opts.port, "UDP port (0 = ephemeral)");
    app.add_option("--bind", opts.bind_address, "Bind address")->capture_default_str();
    app.add_option("--community", opts.community, "Community string")->capture_default_str();
    app.add_option("--if-index", opts.if_index, "ifIndex to answer for")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    try {
        auto rows = mibids::snmp::load_fixture(fixture);
        const auto n = rows.size();
        mibids::snmp::StubAgent agent(std::move(rows), opts);
        std::cout << "listening on " << opts.bind_address << ':' << agent.port() << " rows=" << n << std::endl;
        std::signal(SIGINT, [](int) { g_stop = true; });
        std::signal(SIGTERM, [](int) { g_stop = true; });
        while (!g_stop && agent.rows_served() < n) std::this_thread::sleep_for(std::chrono::milliseconds(50));
        std::cout << "served " << agent.rows_served() << " of " << n << " rows" << std::endl;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
