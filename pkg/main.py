#!/usr/bin/env python3
"""
格多胞形 δ 向量單調性驗證引擎 - 主程式
子命令：delta / hvector / decompose / orbifold / monotone / gen / selftest
"""

import os
import sys
import logging

# 確保專案根目錄在 Python 路徑中
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# 日誌只寫 stderr，stdout 保留給 JSON
logging.basicConfig(
    level=logging.WARNING,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stderr)
    ]
)

from src import cli  # noqa: E402

if __name__ == '__main__':
    sys.exit(cli.main(sys.argv[1:]))
