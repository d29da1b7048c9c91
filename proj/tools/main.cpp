#include "scmi/cli.hpp"

int main(int argc, char** argv) {
    return scmi::run_cli(argc, argv);
}
