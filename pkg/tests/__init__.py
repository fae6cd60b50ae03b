# PASS/FAIL lines from the acceptance module, echoed in the terminal summary
acceptance_log: list = []
