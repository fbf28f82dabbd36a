"""Tests for the main module."""

from unittest.mock import patch

import src.main
from src.main import main


class TestMain:
    """Tests for the main function."""

    @patch("src.main.cli_main")
    def test_main_calls_cli(self, mock_cli_main) -> None:
        """Test that main calls the CLI main function."""
        main()
        mock_cli_main.assert_called_once()

    def test_module_describes_nematiclimit(self) -> None:
        """The entry point documents this project and its commands."""
        assert src.main.__doc__.startswith("Entry point for NematicLimit")
        assert "run-comp" in src.main.__doc__
