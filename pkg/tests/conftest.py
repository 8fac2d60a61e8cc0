import os
import tempfile

# base SQLite jetable : doit précéder tout import de app.database
_DB_DIR = tempfile.mkdtemp(prefix="glhs-tests-")
os.environ.setdefault("DATABASE_URL", f"sqlite:///{_DB_DIR}/glhs_test.db")
os.environ.pop("GLHS_SEED", None)
