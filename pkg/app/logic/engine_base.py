"""Base class for the proof engines with common logging helpers."""

import logging


class ProofEngine:
    """Base class for checkers, searches and translators."""

    def __init__(self, engine_id, system=None):
        """
        Initialize an engine.

        Args:
            engine_id: Short lowercase id used in log lines (e.g., saturate, search)
            system: Calculus or basis the engine works in (e.g., HI, NC), if any

        """
        self.engine_id = engine_id
        self.system = system
        self.logger = logging.getLogger(self.__class__.__name__)

    @property
    def tag(self):
        if self.system:
            return f"{self.engine_id.upper()}[{self.system}]"
        return self.engine_id.upper()

    def run(self, *args, **kwargs):
        """Run the engine. Must be implemented by subclasses."""
        raise NotImplementedError("Subclasses must implement run()")

    def log_start(self, what):
        """Log the start of a run."""
        self.logger.info(f"🚀 {self.tag}: {what}...")

    def log_step(self, message):
        """Log an intermediate step."""
        self.logger.debug(f"🔎 {self.tag}: {message}")

    def log_complete(self, message):
        """Log a completed run."""
        self.logger.info(f"✅ {self.tag}: {message}")

    def log_warning(self, message):
        self.logger.warning(f"⚠️ {self.tag}: {message}")

    def log_error(self, message, exc_info=False):
        """Log an error with optional traceback."""
        self.logger.error(f"❌ {self.tag}: {message}", exc_info=exc_info)
