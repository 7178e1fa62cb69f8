from app.main import app

app()
