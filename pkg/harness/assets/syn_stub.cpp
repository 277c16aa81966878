// Trace-backed implementations of the extern-hook IO interface declared by
// generated programs in extern mode.  Input sampling reads the tick-trace
// format from standard input; output signalling writes it to standard
// output, so extern-mode binaries are byte-comparable with trace-stdio ones.
//
// Compiles stand-alone into a no-op library (no generated code required).

#include <iostream>
#include <set>
#include <sstream>
#include <string>

namespace {
std::set<std::string> g_present;
std::string g_out_line;
bool g_started = false;
}  // namespace

// Advance to the next tick's inputs.  Returns 1 while the trace has a tick
// to run; the first tick always runs (the initialisation reaction happens
// even on an empty trace).  After exhaustion all inputs read as absent.
extern "C" int syn_next_tick(void) {
    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line[0] == '#') continue;
        if (line.empty()) {
            std::cerr << "empty tick line\n";
            std::exit(1);
        }
        g_present.clear();
        if (line != "-") {
            std::istringstream iss(line);
            std::string name;
            while (iss >> name) g_present.insert(name);
        }
        g_started = true;
        return 1;
    }
    g_present.clear();
    if (!g_started) {
        g_started = true;
        return 1;
    }
    return 0;
}

extern "C" unsigned char syn_read_input(const char *name) {
    return g_present.count(name) ? 1 : 0;
}

extern "C" void syn_write_output(const char *name, unsigned char present) {
    if (present) {
        if (!g_out_line.empty()) g_out_line += ' ';
        g_out_line += name;
    }
}

extern "C" void syn_tick_done(void) {
    std::cout << (g_out_line.empty() ? "-" : g_out_line) << "\n";
    g_out_line.clear();
}
