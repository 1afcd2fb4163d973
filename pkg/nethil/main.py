import logging
import sys

from nethil.config.settings import settings
from nethil.harness.cli import cli_main

logging.basicConfig(
    level=logging.DEBUG if settings.DEBUG else logging.INFO,
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
)
logger = logging.getLogger(__name__)


def main() -> None:
    logger.debug(f"{settings.APP_NAME} v{settings.APP_VERSION}")
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
