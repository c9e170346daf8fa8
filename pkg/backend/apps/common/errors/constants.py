# Configuration and invalid-argument codes (2000-2999) -> exit code 2
ERROR_CONFIGURATION = 2000
ERROR_INVALID_ARGUMENT = 2001
ERROR_DIMENSION_MISMATCH = 2002
ERROR_UNKNOWN_CONFIG_KEY = 2003
ERROR_INVALID_CONFIG_VALUE = 2004
ERROR_INVALID_DATASET_SPEC = 2005
ERROR_CLASS_TOO_SMALL = 2006
ERROR_MISSING_TEST_CLASS = 2007
ERROR_EMPTY_BATCH = 2008
ERROR_LENGTH_MISMATCH = 2009
ERROR_OUT_OF_RANGE = 2010
ERROR_EMPTY_GRID = 2011
ERROR_UNDEFINED_CORRELATION = 2012
ERROR_CONFIG_FILE_NOT_FOUND = 2013

# Data codes (3000-3999) -> exit code 3
ERROR_DATA = 3000
ERROR_DATASET_NOT_FOUND = 3001
ERROR_MALFORMED_DATASET = 3002
ERROR_CHECKPOINT_NOT_FOUND = 3003
ERROR_MALFORMED_CHECKPOINT = 3004
ERROR_RUN_NOT_FOUND = 3005

# Internal invariant violations (4000-4999) -> exit code 4
ERROR_INVARIANT = 4000
ERROR_NON_FINITE = 4001
ERROR_INVALID_DISTRIBUTION = 4002
ERROR_SWEEP_CELL_FAILED = 4003

# Message mappings
MESSAGES = {
    # Configuration Error Messages
    ERROR_CONFIGURATION: "Configuration error",
    ERROR_INVALID_ARGUMENT: "Invalid argument",
    ERROR_DIMENSION_MISMATCH: "Dimension mismatch between parameters and inputs",
    ERROR_UNKNOWN_CONFIG_KEY: "Unknown configuration key",
    ERROR_INVALID_CONFIG_VALUE: "Invalid configuration value",
    ERROR_INVALID_DATASET_SPEC: "Invalid dataset spec",
    ERROR_CLASS_TOO_SMALL: "Class too small to satisfy split minimums",
    ERROR_MISSING_TEST_CLASS: "Every class must be represented in the test set",
    ERROR_EMPTY_BATCH: "Batch must not be empty",
    ERROR_LENGTH_MISMATCH: "Aligned inputs have different lengths",
    ERROR_OUT_OF_RANGE: "Value outside its allowed range",
    ERROR_EMPTY_GRID: "Sweep grid is empty",
    ERROR_UNDEFINED_CORRELATION: "Correlation is undefined for zero-variance inputs",
    ERROR_CONFIG_FILE_NOT_FOUND: "Configuration file not found",

    # Data Error Messages
    ERROR_DATA: "Data error",
    ERROR_DATASET_NOT_FOUND: "Dataset file not found",
    ERROR_MALFORMED_DATASET: "Malformed dataset file",
    ERROR_CHECKPOINT_NOT_FOUND: "Checkpoint file not found",
    ERROR_MALFORMED_CHECKPOINT: "Malformed checkpoint file",
    ERROR_RUN_NOT_FOUND: "Run directory not found",

    # Invariant Error Messages
    ERROR_INVARIANT: "Internal invariant violated",
    ERROR_NON_FINITE: "Non-finite value produced",
    ERROR_INVALID_DISTRIBUTION: "Weights do not form a valid distribution",
    ERROR_SWEEP_CELL_FAILED: "Sweep cell failed",
}


def get_message(message_code):
    """Get message text for a given message code."""
    return MESSAGES.get(message_code, f"Unknown message code: {message_code}")


def exit_code_for(message_code):
    """Process exit code for a message code: the thousands digit (2, 3 or 4)."""
    if 2000 <= message_code < 5000:
        return message_code // 1000
    return 4
