import sys


def pytest_terminal_summary(terminalreporter):
    for name, module in sys.modules.items():
        if name.rsplit(".", 1)[-1] == "test_acceptance":
            lines = getattr(module, "ACCEPTANCE_LINES", None)
            if lines:
                terminalreporter.write_sep("-", "acceptance criteria")
                for line in lines:
                    terminalreporter.write_line(line)
            break
