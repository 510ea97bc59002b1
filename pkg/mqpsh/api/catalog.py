import argparse

from mqpsh.services.catalog_service import catalog_service


def catalog(args: argparse.Namespace) -> int:
    print(catalog_service.catalog_list())
    return 0


def register(subparsers):
    parser = subparsers.add_parser("catalog", help="list the built-in functions")
    parser.set_defaults(handler=catalog)
