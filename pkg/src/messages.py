"""
Output templates for the command-line front end. Templates are formatted
strings populated at runtime; verdict templates carry prompt-toolkit style
tags (<success>, <warning>, <error>, <value>) that are stripped for plain
output.
"""

# Result lines
VALUE_LINE = "{name}: {value}"
POINTWISE_LINE = "{index} {value}"
GENERATED_MESH = "wrote {kind} with {element_count} elements to {path}"
REPORT_WRITTEN = "Report written to {path}"

# Verdicts
OPEN_SURFACE_WARNING = (
    "<warning>warning:</warning> surface is not closed "
    "(<value>{boundary_edges}</value> boundary pieces); "
    "the cancellation condition may fail and pointwise values need not equal alpha"
)
INCONSISTENT_ORIENTATION_WARNING = (
    "<warning>warning:</warning> element orientation is inconsistent across shared edges"
)
OCC_PASSED = "<success>OCC satisfied</success> on <value>{lines}</value> sampled lines"
OCC_FAILED = (
    "<error>OCC violated</error>: <value>{violating}</value> lines with nonzero sign sum, "
    "<value>{alternation}</value> alternation and <value>{parity}</value> parity violations"
)
JACOBIAN_PASSED = (
    "<success>Jacobian formula confirmed</success>: max relative error <value>{error}</value>"
)
JACOBIAN_FAILED = (
    "<error>Jacobian mismatch</error>: <value>{failures}</value> samples exceed "
    "relative error {tolerance}"
)
