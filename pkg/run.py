#!/usr/bin/env python3
"""
HelpCap - Launcher Script
Capacidade de canais com estado assistidos por um auxiliar de taxa limitada

Uso: python run.py capacity data/channels/mod2_additive.json 0.3
"""

import sys
from pathlib import Path

# Add backend to Python path
backend_path = Path(__file__).parent / "backend"
sys.path.insert(0, str(backend_path))


def check_python() -> bool:
    """Verificar a versão do Python"""
    if sys.version_info < (3, 9):
        print("❌ Python 3.9+ é necessário", file=sys.stderr)
        return False
    return True


def main() -> int:
    """Função principal"""
    if not check_python():
        return 1

    from app.main import main as cli_main
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
